import math

import numpy as np
import pytest

from conftest import at_least
from sparsesketch.errors import DomainError
from sparsesketch.harness import SetQueryTask, SignalSpec, run_trials
from sparsesketch.hashing import derive_seed, rng_for
from sparsesketch.set_query import LayeredCountSketch, sq_query, sq_update


def test_layer_sizes(desk):
    sk = LayeredCountSketch.from_profile(1 << 14, 64, 0.25, desk, 0)
    assert sk.num_layers == 6
    C, g, k, e = desk.sq_C, desk.sq_gamma, 64, 0.25
    assert sk.buckets == [math.ceil(C * k * g**i / (e * (10 * g) ** i) - 1e-9) for i in range(1, 7)]


def test_update_cancels(desk):
    sk = LayeredCountSketch.from_profile(1000, 8, 0.5, desk, 1)
    sq_update(sk, 5, 1.0)
    sq_update(sk, 5, -1.0)
    assert np.all(sk.y == 0)


def test_update_expansion(desk):
    sk = LayeredCountSketch.from_profile(1000, 8, 0.5, desk, 1)
    assert sk.update(3, 5.0) == 3
    rows, signs = sk.cells([3])
    expected = np.zeros_like(sk.y)
    expected[rows[:, 0]] = 5.0 * signs[:, 0]
    assert np.array_equal(sk.y, expected)
    for layer, h in enumerate(sk.hashes):
        assert rows[layer, 0] == sk.offsets[layer] + h(np.array([3]))[0]


def test_stream_equals_batch(desk, rng):
    x = rng.standard_normal(3000) * (rng.random(3000) < 0.3)
    a = LayeredCountSketch.from_profile(3000, 16, 0.5, desk, 4).apply(x)
    b = LayeredCountSketch.from_profile(3000, 16, 0.5, desk, 4)
    for i in np.flatnonzero(x):
        b.update(int(i), float(x[i]))
    assert np.array_equal(a.y, b.y)


def test_exact_on_support(desk):
    trials, hits = 200, 0
    for s in range(trials):
        rng = rng_for(1, s)
        S = rng.choice(2048, 16, replace=False)
        x = np.zeros(2048)
        x[S] = rng.standard_normal(16) * 10
        est = LayeredCountSketch.from_profile(2048, 16, 0.5, desk, derive_seed(2, s)).apply(x).query(S)
        # peeling subtracts floats, so exact means equal up to roundoff
        hits += np.allclose(est.values, x[est.indices], rtol=0, atol=1e-9)
    assert at_least(hits, trials, 0.9)


def test_empty_query(desk):
    sk = LayeredCountSketch.from_profile(100, 4, 0.5, desk, 0).apply(np.ones(100))
    assert len(sq_query(sk, [])) == 0


def test_capacity_enforced(desk):
    sk = LayeredCountSketch.from_profile(100, 4, 0.5, desk, 0)
    with pytest.raises(DomainError):
        sk.query(range(5))
    with pytest.raises(DomainError):
        sk.update(100, 1.0)


def test_noise_quantile(desk):
    spec = SignalSpec("spikes+gaussian-tail", n=1 << 12, k=16, eps=0.25)
    reps = run_trials(SetQueryTask(spec, 16, 0.25, desk), 200, 3)
    ratios = np.array([r.metrics["err_ratio"] for r in reps])
    assert np.quantile(ratios, 0.9, method="lower") <= 0.25
    assert all(r.metrics["touch_ok"] for r in reps)


def test_save_load_roundtrip(tmp_path, desk, rng):
    x = rng.standard_normal(500)
    sk = LayeredCountSketch.from_profile(500, 8, 0.5, desk, 7).apply(x)
    sk.save(tmp_path / "sk.json")
    back = LayeredCountSketch.load(tmp_path / "sk.json")
    assert np.array_equal(back.y, sk.y)
    S = [1, 2, 3]
    assert np.array_equal(back.query(S).values, sk.query(S).values)
