import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsesketch.errors import DomainError
from sparsesketch.hashing import (
    MERSENNE_61, CounterRNG, PairwiseHash, SignFunction, StableSampler, biased_walk_return_freq,
    derive_seed, gaussian_tail_bounds_check, mulmod61, stderr,
)


def test_derive_seed_is_stable_and_tag_sensitive():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(1, "a", 3)
    assert 0 <= derive_seed(7) < 1 << 64


@given(st.integers(1, MERSENNE_61 - 1), st.lists(st.integers(0, (1 << 32) - 1), min_size=1, max_size=20))
def test_mulmod61_matches_python(a, idx):
    got = mulmod61(a, np.array(idx, dtype=np.uint64))
    assert got.tolist() == [(a * i) % MERSENNE_61 for i in idx]


@given(st.integers(0, 2**64 - 1), st.integers(1, 10**6), st.lists(st.integers(0, (1 << 32) - 1), max_size=20))
def test_pairwise_hash_matches_reference(key, buckets, idx):
    h = PairwiseHash(key, buckets)
    assert h(np.array(idx, dtype=np.int64)).tolist() == [h.reference(i) for i in idx]


def test_single_bucket_and_determinism():
    h = PairwiseHash(99, 1)
    assert np.all(h(np.arange(1000)) == 0)
    g = PairwiseHash(5, 17)
    assert int(g(7)) == int(g(7)) == int(PairwiseHash(5, 17)(7))


def test_hash_domain_limit():
    with pytest.raises(DomainError):
        PairwiseHash(1, 4)(np.array([1 << 32]))


def test_pairwise_collision_rate():
    B, trials = 16, 100_000
    hits = 0
    for s in range(trials):
        h = PairwiseHash(derive_seed(2024, "coll", s), B)
        a, b = h(np.array([11, 12345]))
        hits += int(a == b)
    p = hits / trials
    assert abs(p - 1 / B) <= 3 * stderr(p, trials)


def test_counter_rng_random_access():
    r = CounterRNG(42)
    full = r.uniform(np.arange(100))
    assert np.array_equal(r.uniform(np.array([3, 50, 99])), full[[3, 50, 99]])
    assert np.all((full > 0) & (full < 1))
    assert np.array_equal(r.gaussian(np.arange(10)), CounterRNG(42).gaussian(np.arange(10)))


def test_counter_rng_gaussian_moments():
    g = CounterRNG(7).gaussian(np.arange(200_000))
    assert abs(g.mean()) < 0.01
    assert abs(g.var() - 1) < 0.02


def test_stable_samplers():
    with pytest.raises(DomainError):
        StableSampler(1.5, 0)
    c = StableSampler(1, 3)(np.arange(100_000))
    # median of |Cauchy| is 1
    assert abs(np.median(np.abs(c)) - 1) < 0.03


def test_sign_function_balanced():
    s = SignFunction(11)(np.arange(100_000))
    assert set(np.unique(s).tolist()) == {-1.0, 1.0}
    assert abs(s.mean()) < 0.02


def test_gaussian_facts():
    r = gaussian_tail_bounds_check(0.5, 200_000, 1)
    assert r["p_small"] <= 0.40 + 3 * r["p_small_stderr"]
    assert r["p_band"] >= 0.63 - 3 * r["p_band_stderr"]
    tiny = gaussian_tail_bounds_check(1e-4, 100_000, 2)
    assert tiny["p_small"] <= 1e-3


def test_walk_deterministic_and_bounds():
    assert biased_walk_return_freq(1.0, 1000, 500, 0)["frequency"] == 0.0
    r = biased_walk_return_freq(0.95, 2000, 4000, 3)
    assert r["frequency"] <= 0.05 / 0.95 + 3 * r["stderr"]
    with pytest.raises(DomainError):
        biased_walk_return_freq(0.5, 10, 10, 0)
