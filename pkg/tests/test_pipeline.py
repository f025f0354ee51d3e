import numpy as np

from conftest import at_least
from sparsesketch.harness import RecoverTask, SignalSpec, run_trials
from sparsesketch.pipeline import PipelineConfig, recover, recovery_error


def test_zero_signal(desk):
    res = recover(np.zeros(4096), PipelineConfig(4, 0.5, desk, 1))
    assert np.all(res.estimate.to_dense() == 0)


def test_exact_sparse(desk):
    spec = SignalSpec("spikes", n=1 << 12, k=4, eps=0.5)
    reps = run_trials(RecoverTask(spec, 4, 0.5, desk, tol=1e-9), 40, 2)
    assert at_least(sum(r.success for r in reps), 40, 0.75)


def test_planted_recovery(desk):
    spec = SignalSpec("spikes+gaussian-tail", n=1 << 12, k=4, eps=0.5)
    reps = run_trials(RecoverTask(spec, 4, 0.5, desk), 60, 3)
    assert at_least(sum(r.success for r in reps), 60, 0.75)


def test_recovery_error_definition():
    x = np.array([3.0, 1.0, 0.0, 2.0])
    from sparsesketch.signal import SparseApprox
    err, tail = recovery_error(x, SparseApprox(4, np.array([0]), np.array([3.0])), 1)
    assert err == tail == np.sqrt(5)
