import numpy as np
import pytest

from conftest import at_least
from sparsesketch.errors import DomainError
from sparsesketch.fourier import (
    SpectrumPermutation, build_filter, dft, estimate_values, event_frequencies, fourier_rounds,
    fourier_set_query, hash_to_bins, idft, permute_spectrum_check, round_schedule,
)
from sparsesketch.hashing import derive_seed, rng_for
from sparsesketch.oracle import naive_dft
from sparsesketch.signal import SparseApprox


def basis_spectrum(n, f, value=1.0):
    s = np.zeros(n, dtype=complex)
    s[f] = value
    return s


def test_dft_of_delta_is_flat():
    x = np.zeros(16)
    x[0] = 1
    assert np.allclose(dft(x), np.full(16, 0.25), atol=1e-15)


@pytest.mark.parametrize("n", [1, 4, 64, 1024])
def test_dft_matches_naive(rng, n):
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    assert np.max(np.abs(dft(x) - naive_dft(x))) <= 1e-12 * max(1, np.sqrt(n))
    assert np.allclose(idft(dft(x)), x, atol=1e-12)


def test_dft_requires_power_of_two():
    with pytest.raises(DomainError):
        dft(np.ones(6))


def test_permutation_identity_and_random(rng):
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert permute_spectrum_check(x, 1, 0, 0) == 0
    for _ in range(10):
        sigma = 2 * int(rng.integers(0, 8)) + 1
        assert permute_spectrum_check(x, sigma, int(rng.integers(16)), int(rng.integers(16))) <= 1e-10


def test_one_sparse_spectrum_stays_one_sparse():
    n, f = 64, 13
    perm = SpectrumPermutation(n, 7, 5, 9)
    out = naive_dft(perm.apply(idft(basis_spectrum(n, f))))
    big = np.flatnonzero(np.abs(out) > 1e-9)
    assert big.tolist() == [int(perm.pi(f))]


def test_even_sigma_rejected():
    with pytest.raises(DomainError):
        SpectrumPermutation(16, 4, 0, 0)


def test_offsets_bounded():
    perm = SpectrumPermutation.random(1024, 3)
    o = perm.offsets(np.arange(1024), 32)
    assert np.all(np.abs(o) <= 16)


def test_filter_edges():
    f = build_filter(1 << 10, 16, 1e-6, 0.25)
    assert f.response(0) == 1.0
    assert f.response(512) == 0.0
    assert f.delta_filter <= 1e-6


def test_hash_to_bins_zero():
    n, B = 256, 16
    perm = SpectrumPermutation.random(n, 1)
    filt = build_filter(n, B, 1e-6, 0.25)
    assert np.all(hash_to_bins(np.zeros(n, complex), None, perm, filt) == 0)


@pytest.mark.parametrize("seed", range(5))
def test_hash_to_bins_single_tone(seed):
    n, B, delta, f = 512, 16, 1e-6, 77
    perm = SpectrumPermutation.random(n, seed)
    filt = build_filter(n, B, delta, 0.25)
    u = hash_to_bins(idft(basis_spectrum(n, f)), None, perm, filt)
    expected = filt.response(-perm.offsets(f, B)) * perm.spectrum_phase(f)
    assert abs(u[perm.bins(f, B)] - expected) <= delta + filt.delta_filter


@pytest.mark.parametrize("seed", range(5))
def test_hash_to_bins_perfect_residual(seed):
    n, B, delta = 512, 16, 1e-6
    rng = rng_for(seed, "resid")
    S = np.sort(rng.choice(n, 6, replace=False))
    spec = basis_spectrum(n, S, rng.standard_normal(6) + 1j * rng.standard_normal(6))
    perm = SpectrumPermutation.random(n, seed)
    filt = build_filter(n, B, delta, 0.25)
    u = hash_to_bins(idft(spec), SparseApprox(n, S, spec[S]), perm, filt)
    l1 = np.abs(spec).sum()
    assert np.max(np.abs(u)) <= delta * l1 + filt.delta_filter * l1


def test_estimate_singleton():
    n, B, f, delta = 512, 16, 200, 1e-6
    x = idft(basis_spectrum(n, f, 2 - 1j))
    for seed in range(20):
        est = estimate_values(x, None, [f], B, delta, 0.25, seed)
        large = abs(int(est.perm.offsets(f, B))) >= build_filter(n, B, delta, 0.25).flat_edge
        assert (f in est.isolated) != large
        if not large:
            g = build_filter(n, B, delta, 0.25).response(-est.perm.offsets(f, B))
            err = abs(est.values.values[0] - (2 - 1j))
            assert err <= delta * abs(2 - 1j) + 1e-6 + (1 - g) * abs(2 - 1j)


def test_forced_collision_excludes_both():
    n, B, seed = 512, 16, 4
    perm = SpectrumPermutation.random(n, seed)
    bins = perm.bins(np.arange(n), B)
    f1 = 10
    f2 = int(np.flatnonzero((bins == bins[f1]) & (np.arange(n) != f1))[0])
    x = idft(basis_spectrum(n, [f1, f2], [1.0, 1.0]))
    est = estimate_values(x, None, [f1, f2], B, 1e-6, 0.25, seed)
    assert est.isolated.size == 0


def test_round_schedule(desk):
    assert fourier_rounds(8, desk) == 4
    B1, a1 = round_schedule(4096, 8, 0.5, desk, 1)
    assert B1 & (B1 - 1) == 0 and a1 == pytest.approx(1 / desk.fourier_alpha_divisor)


def test_exact_sparse_set_query(desk):
    n, trials, delta, hits = 1024, 100, 1e-6, 0
    for s in range(trials):
        rng = rng_for(6, s)
        S = np.sort(rng.choice(n, 8, replace=False))
        spec = basis_spectrum(n, S, np.exp(2j * np.pi * rng.random(8)))
        res = fourier_set_query(idft(spec), S, 8, 0.5, delta, desk, derive_seed(7, s))
        err = np.sum(np.abs(res.estimate.values - spec[res.estimate.indices]) ** 2)
        hits += err <= delta * np.abs(spec).sum() ** 2
    assert at_least(hits, trials, 0.9)


def test_single_tone_set_query(desk):
    n, f, delta = 1024, 321, 1e-6
    spec = basis_spectrum(n, f, 0.5j)
    res = fourier_set_query(idft(spec), [f], 1, 0.5, delta, desk, 3)
    assert abs(res.estimate.values[0] - 0.5j) ** 2 <= delta * 0.25


def test_event_frequency_edge_cases():
    rng = rng_for(0, "ev")
    spec = rng.standard_normal(256) + 0j
    single = event_frequencies(spec, [5], 16, 0.25, 200, 1)
    assert single["collision"]["frequency"] == 0
    full = event_frequencies(spec, [5], 256, 0.5, 200, 1)
    assert full["offset"]["frequency"] <= 0.5 + 3 * full["offset"]["stderr"]


def test_collision_rate_bound():
    rng = rng_for(1, "ev")
    spec = rng.standard_normal(4096) * 0.01 + 0j
    S = np.sort(rng.choice(4096, 8, replace=False))
    r = event_frequencies(spec, S, 256, 0.25, 1000, 2)
    assert r["collision"]["frequency"] <= 1 / 8 + 3 * r["collision"]["stderr"]
