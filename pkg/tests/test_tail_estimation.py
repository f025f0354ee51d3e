import numpy as np
import pytest

from conftest import at_least
from sparsesketch.errors import DomainError
from sparsesketch.harness import SignalSpec, generate
from sparsesketch.hashing import derive_seed
from sparsesketch.tail_estimation import (
    lower_median, repetitions, sampled_mass, tail_bracket, tail_estimate, tail_sketch_build,
)
from sparsesketch.signal import tail_norm


def test_lower_median():
    assert lower_median([3, 1, 2]) == 2
    assert lower_median([4, 1, 3, 2]) == 2
    assert lower_median(np.array([[1, 5], [2, 6], [3, 7], [9, 0]]), axis=0).tolist() == [2, 5]


def test_repetitions_grow_with_confidence():
    assert repetitions(0.05) < repetitions(0.001)
    assert repetitions(0.05) % 2 == 1


def test_zero_signal():
    sk = tail_sketch_build(np.zeros(500), 2, 2, 0.05, 1)
    assert np.all(sk.y == 0)
    assert tail_estimate(sk) == 0


@pytest.mark.parametrize("p", [1, 2])
def test_homogeneity(rng, p):
    x = rng.standard_normal(3000)
    a = tail_sketch_build(x, 3, p, 0.05, 9)
    b = tail_sketch_build(2 * x, 3, p, 0.05, 9)
    assert np.allclose(b.y, 2 * a.y, rtol=0, atol=1e-12)


def test_rows_match_measurements(rng):
    x = rng.standard_normal(700)
    sk = tail_sketch_build(x, 1, 2, 0.1, 4)
    for t in range(sk.m):
        assert np.isclose(sk.row(t) @ x, sk.y[t], rtol=1e-12, atol=1e-12)


def test_bracket_values_for_ones():
    lo, hi = tail_bracket(np.ones(10_000), 10, 2, 10)
    assert lo == pytest.approx(99.0)
    assert hi == pytest.approx(999.0)


def test_one_sparse_gives_zero():
    delta, trials, hits = 0.05, 300, 0
    for s in range(trials):
        x = np.zeros(2000)
        x[int(s * 37 % 2000)] = 1e6
        hits += tail_estimate(tail_sketch_build(x, 1, 2, delta, derive_seed(5, s))) == 0
    assert at_least(hits, trials, 1 - delta)


@pytest.mark.parametrize("generator", ["spikes+gaussian-tail", "geometric-decay", "ones"])
def test_upper_bound_side(generator):
    # V <= (1/k)||x_{-k}||_2^2 with probability 1 - delta
    delta, trials, k, hits = 0.05, 200, 5, 0
    for s in range(trials):
        x = generate(SignalSpec(generator, n=5000, k=k, ratio=0.999), derive_seed(3, s)).x
        V = tail_estimate(tail_sketch_build(x, k, 2, delta, derive_seed(4, s)))
        hits += V <= tail_norm(x, k) ** 2 / k
    assert at_least(hits, trials, 1 - delta)


def test_sampling_rate_expectation():
    # E y_t^2 = ||x||^2 / (100 k) for p = 2
    x = np.ones(10_000)
    vals = np.concatenate([tail_sketch_build(x, 10, 2, 0.05, s).y ** 2 for s in range(150)])
    assert vals.mean() == pytest.approx(10.0, rel=0.1)


def test_sampled_mass_is_norm_of_kept(rng):
    x = rng.standard_normal(4000)
    sk = tail_sketch_build(x, 2, 2, 0.1, 8)
    mass = sampled_mass(x, sk)
    assert mass[0] == pytest.approx(np.linalg.norm(x[sk.kept(0)]))


@pytest.mark.parametrize("kw", [dict(k=0), dict(k=2, p=3), dict(k=2, delta=0.7)])
def test_domain_errors(kw):
    with pytest.raises(DomainError):
        tail_sketch_build(np.ones(10), **kw)
