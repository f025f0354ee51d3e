"""The acceptance checks, each runnable on its own (``sparsesketch acceptance -c N``)."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .fourier import SpectrumPermutation, build_filter, event_frequencies, hash_to_bins_inputs
from .harness import (
    FourierTask, RecoverTask, SetQueryTask, SignalSpec, TailTask, emit_report, generate,
    run_trials, summarize,
)
from .hashing import biased_walk_return_freq, derive_seed, gaussian_tail_bounds_check, rng_for
from .identification import forest_geometry, forest_sketch_build
from .oracle import dense_matrix, dense_sketch_apply, hash_to_bins_matrix, naive_dft
from .profiles import DESK, ConstantProfile
from .pruning import prune_sketch_build
from .set_query import LayeredCountSketch
from .tail_estimation import tail_sketch_build

DEFAULT_SEED = 20261014


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items() if not isinstance(v, (list, dict)))
        body = f"{keys}; " if keys else ""
        return f"[{verdict}] criterion {self.number}: {self.name} ({body}{self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return {"type": "criterion", "number": self.number, "name": self.name,
                "passed": self.passed, "detail": self.detail}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _stat_detail(summary: dict) -> dict:
    return {k: summary[k] for k in ("trials", "frequency", "stderr", "threshold") if k in summary}


# -- individual criteria -----------------------------------------------------------

def recovery_spec(n=1 << 16, k=16, eps=0.5, noisy=True) -> SignalSpec:
    return SignalSpec("spikes+gaussian-tail" if noisy else "spikes", n=n, k=k, eps=eps, spike_factor=10.0, noise=1.0)


@_timed
def criterion_1(seed=DEFAULT_SEED, trials=200, jobs=1) -> CriterionResult:
    t0 = time.perf_counter()
    reps = run_trials(RecoverTask(recovery_spec(), 16, 0.5, DESK), trials, seed, jobs)
    elapsed = time.perf_counter() - t0
    s = summarize(reps, 0.75)
    d = _stat_detail(s) | {"runtime_s": elapsed, "runtime_limit_s": 300.0}
    return CriterionResult(1, "end-to-end l2/l2 recovery", s["passed"] and elapsed <= 300, d)


@_timed
def criterion_2(seed=DEFAULT_SEED, trials=200, jobs=1) -> CriterionResult:
    reps = run_trials(RecoverTask(recovery_spec(noisy=False), 16, 0.5, DESK, tol=1e-9), trials, seed, jobs)
    s = summarize(reps)
    d = _stat_detail(s) | {"required": 0.75, "max_abs_error": max(r.metrics["abs_error"] for r in reps)}
    return CriterionResult(2, "exact-sparse recovery", s["frequency"] >= 0.75, d)


@_timed
def criterion_3(seed=DEFAULT_SEED, trials=1000, jobs=1) -> CriterionResult:
    spec = SignalSpec("ones", n=10_000, k=10)
    t0 = time.perf_counter()
    reps = run_trials(TailTask(spec, 10, 2, 0.05, DESK), trials, seed, jobs)
    elapsed = time.perf_counter() - t0
    s = summarize(reps, 0.95)
    V = np.array([r.metrics["V"] for r in reps])
    d = _stat_detail(s) | {
        "lower_bound": reps[0].metrics["lower_bound"], "upper_bound": reps[0].metrics["upper_bound"],
        "V_median": float(np.median(V)), "V_max": float(V.max()), "runtime_s": elapsed,
    }
    return CriterionResult(3, "tail-estimation bracket", s["passed"] and elapsed <= 60, d)


@_timed
def criterion_4(seed=DEFAULT_SEED, walks=10_000, steps=10_000) -> CriterionResult:
    r = biased_walk_return_freq(0.9, steps, walks, seed)
    limit = r["bound"] + 3 * r["stderr"]
    d = {"frequency": r["frequency"], "stderr": r["stderr"], "limit": limit}
    return CriterionResult(4, "biased random walk return", r["frequency"] <= limit, d)


@_timed
def criterion_5(seed=DEFAULT_SEED, draws=10**6) -> CriterionResult:
    r = gaussian_tail_bounds_check(0.5, draws, seed)
    ok_small = r["p_small"] <= 0.40 + 3 * r["p_small_stderr"]
    ok_band = r["p_band"] >= 0.63 - 3 * r["p_band_stderr"]
    d = {"p_small": r["p_small"], "p_band": r["p_band"], "stderr_small": r["p_small_stderr"],
         "stderr_band": r["p_band_stderr"]}
    return CriterionResult(5, "Gaussian anti-concentration facts", ok_small and ok_band, d)


@_timed
def criterion_6(seed=DEFAULT_SEED, trials=200, jobs=1) -> CriterionResult:
    spec = SignalSpec("spikes+gaussian-tail", n=1 << 14, k=64, eps=0.25)
    reps = run_trials(SetQueryTask(spec, 64, 0.25, DESK), trials, seed, jobs)
    s = summarize(reps, 0.9)
    touches_ok = all(r.metrics["touch_ok"] for r in reps)
    d = _stat_detail(s) | {"touches_ok": touches_ok, "expected_touches": reps[0].metrics["expected_touches"]}
    return CriterionResult(6, "set-query guarantee", s["passed"] and touches_ok, d)


def tones_spec(n=1 << 12, k=8, noise=0.01) -> SignalSpec:
    return SignalSpec("tones", n=n, k=k, noise=noise)


@_timed
def criterion_7(seed=DEFAULT_SEED, trials=200, jobs=1) -> CriterionResult:
    reps = run_trials(FourierTask(tones_spec(), 8, 0.5, 1e-6, DESK), trials, seed, jobs)
    s = summarize(reps, 0.9)
    d = _stat_detail(s) | {"mean_samples": float(np.mean([r.metrics["samples"] for r in reps]))}
    return CriterionResult(7, "Fourier set query", s["passed"], d)


@_timed
def criterion_8(seed=DEFAULT_SEED, trials=2000) -> CriterionResult:
    g = generate(tones_spec(), derive_seed(seed, "events-signal"))
    spectrum = naive_dft(g.x)
    r = event_frequencies(spectrum, g.support, 256, 0.25, trials, seed)
    d, ok = {}, True
    for name in ("collision", "offset", "noise"):
        e = r[name]
        limit = e["bound"] + 3 * e["stderr"]
        d[name] = e["frequency"]
        d[f"{name}_limit"] = limit
        ok &= e["frequency"] <= limit
    return CriterionResult(8, "Fourier event bounds", bool(ok), d)


def filter_report(n=1 << 12, B=64, alpha=0.25, delta=1e-6) -> dict:
    f = build_filter(n, B, delta, alpha)
    freqs = np.abs(np.where(np.arange(n) >= n // 2, np.arange(n) - n, np.arange(n)))
    flat = freqs <= f.flat_edge
    stop = freqs >= f.stop_edge
    dense = np.zeros(n, dtype=np.complex128)
    dense[np.mod(f.taps, n)] = f.values
    measured = naive_dft(dense) * math.sqrt(n)
    delta_measured = float(np.max(np.abs(measured - f.ideal)))
    return {
        "n": n, "B": B, "alpha": alpha, "delta": delta,
        "flat_exact": bool(np.all(f.ideal[flat] == 1.0)),
        "stop_exact": bool(np.all(f.ideal[stop] == 0.0)),
        "in_unit_interval": bool(np.all((f.ideal >= 0) & (f.ideal <= 1))),
        "delta_filter": delta_measured,
        "delta_ok": delta_measured <= delta,
        "support": f.support_size,
        "support_bound_unit": B / alpha * math.log2(n / delta),
        "c_f": f.support_constant,
    }


@_timed
def criterion_9() -> CriterionResult:
    r = filter_report()
    ok = r["flat_exact"] and r["stop_exact"] and r["in_unit_interval"] and r["delta_ok"]
    return CriterionResult(9, "flat-window filter", bool(ok), r)


def oracle_equivalence(n: int, seed: int, profile: ConstantProfile = DESK) -> dict[str, bool]:
    """Fast path vs. dense matrix for every linear sketch, exact comparison."""
    rng = rng_for(seed, "oracle-signal")
    x = rng.standard_normal(n) * (rng.random(n) < 0.5)
    out = {}
    geom = forest_geometry(n, 1, 0.5, profile)
    fs = forest_sketch_build(x, geom, seed)
    out["forest"] = np.array_equal(fs.y.ravel(), dense_sketch_apply(dense_matrix(fs), x))
    ps = prune_sketch_build(x, 4, 0.25, profile, seed)
    out["prune"] = np.array_equal(ps.y.ravel(), dense_sketch_apply(dense_matrix(ps), x))
    sq = LayeredCountSketch.from_profile(n, 16, 0.5, profile, seed)
    streamed = LayeredCountSketch.from_profile(n, 16, 0.5, profile, seed)
    for i in np.flatnonzero(x):
        streamed.update(int(i), float(x[i]))
    sq.apply(x)
    dense_y = dense_sketch_apply(dense_matrix(sq), x)
    out["set_query_batch"] = np.array_equal(sq.y, dense_y)
    out["set_query_stream"] = np.array_equal(streamed.y, dense_y)
    ts = tail_sketch_build(x, 1, 2, 0.1, seed)
    out["tail"] = np.array_equal(ts.y, dense_sketch_apply(dense_matrix(ts), x))
    xc = x + 1j * rng.standard_normal(n)
    perm = SpectrumPermutation.random(n, seed)
    for B in (4, 32):
        filt = build_filter(n, B, 1e-6, 0.25)
        out[f"hash_to_bins_B{B}"] = np.array_equal(
            hash_to_bins_inputs(xc, perm, filt), dense_sketch_apply(hash_to_bins_matrix(perm, filt), xc)
        )
    return out


@_timed
def criterion_10(seed=DEFAULT_SEED, seeds=20, sizes=(256, 1024)) -> CriterionResult:
    failures = []
    for n in sizes:
        for s in range(seeds):
            for name, ok in oracle_equivalence(n, derive_seed(seed, "oracle", s)).items():
                if not ok:
                    failures.append(f"{name}@n={n},seed={s}")
    d = {"checks": len(sizes) * seeds, "failures": len(failures), "failed": failures[:10]}
    return CriterionResult(10, "oracle equivalence", not failures, d)


def _determinism_runs(seed: int) -> dict[str, tuple]:
    def twice(task, trials, jobs=(1, 1)):
        a = emit_report(run_trials(task, trials, seed, jobs[0]))
        b = emit_report(run_trials(task, trials, seed, jobs[1]))
        return a, b

    return {
        "recover": twice(RecoverTask(recovery_spec(n=1 << 12, k=4), 4, 0.5, DESK), 3),
        "recover_jobs": twice(RecoverTask(recovery_spec(n=1 << 12, k=4), 4, 0.5, DESK), 4, (1, 2)),
        "tail": twice(TailTask(SignalSpec("ones", n=10_000, k=10), 10, 2, 0.05, DESK), 20),
        "set_query": twice(SetQueryTask(SignalSpec("spikes+gaussian-tail", n=1 << 12, k=16, eps=0.25), 16, 0.25, DESK), 5),
        "fourier": twice(FourierTask(tones_spec(n=1 << 10), 8, 0.5, 1e-6, DESK), 5),
    }


@_timed
def criterion_11(seed=DEFAULT_SEED) -> CriterionResult:
    runs = _determinism_runs(seed)
    same = {name: a == b for name, (a, b) in runs.items()}
    d = {"reruns": len(same), "identical_runs": sum(same.values()), "identical": same}
    return CriterionResult(11, "determinism", all(same.values()), d)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}
