import math

import numpy as np

from conftest import at_least
from sparsesketch.harness import PruneTask, SignalSpec, run_trials
from sparsesketch.hashing import derive_seed, rng_for
from sparsesketch.pruning import prune, prune_dimensions, prune_sketch_build


def test_dimensions(desk):
    R, B = prune_dimensions(4, 0.25, desk)
    assert R == math.ceil(6 * 2) and B == 128


def test_zero_and_basis(desk):
    sk = prune_sketch_build(np.zeros(512), 2, 0.5, desk, 1)
    assert np.all(sk.y == 0)
    x = np.zeros(512)
    x[17] = 1.0
    sk = prune_sketch_build(x, 2, 0.5, desk, 1)
    expected = np.zeros_like(sk.y)
    for r, h in enumerate(sk.hashes):
        expected[r, h(np.array([17]))[0]] = sk.gaussian(r).gaussian(np.array([17]))[0]
    assert np.array_equal(sk.y, expected)


def test_singleton_list(desk, rng):
    sk = prune_sketch_build(rng.standard_normal(256), 1, 0.5, desk, 2)
    assert prune(sk, [42], 1, desk).tolist() == [42]


def test_output_size(desk, rng):
    x = rng.standard_normal(2048)
    sk = prune_sketch_build(x, 3, 0.5, desk, 2)
    S = prune(sk, np.arange(500), 3, desk)
    assert S.size == math.ceil(desk.prune_beta * 3)


def test_exact_sparse_support_kept(desk):
    trials, hits, k, n = 200, 0, 4, 4096
    for s in range(trials):
        rng = rng_for(9, s)
        supp = rng.choice(n, k, replace=False)
        x = np.zeros(n)
        x[supp] = (1.0 + np.arange(k)) * rng.choice([-1, 1], k)
        L = np.union1d(supp, rng.choice(n, 200, replace=False))
        S = prune(prune_sketch_build(x, k, 0.25, desk, derive_seed(10, s)), L, k, desk)
        hits += set(supp.tolist()) <= set(S.tolist())
    assert at_least(hits, trials, 0.9)


def test_planted_guarantee(desk):
    spec = SignalSpec("spikes+gaussian-tail", n=1 << 12, k=4, eps=0.25)
    reps = run_trials(PruneTask(spec, 4, 0.25, desk), 200, 5)
    assert at_least(sum(r.success for r in reps), 200, 0.9)
