"""Monte Carlo orchestration: signal generators, per-trial tasks, reports.

Trial i of a run with master seed s draws all of its randomness from
derive_seed(s, "trial", i), so reports do not depend on --jobs.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .fourier import fourier_set_query, idft
from .hashing import derive_seed, rng_for, stderr
from .identification import forest_decode, forest_geometry, forest_sketch_build
from .oracle import naive_dft
from .pipeline import TAIL_DELTA, PipelineConfig, recover, recovery_error
from .profiles import ConstantProfile
from .pruning import prune, prune_sketch_build
from .set_query import LayeredCountSketch
from .signal import SparseApprox, complement_norm, head_set, lp_norm, restrict, tail_norm
from .signal_io import read_signal, read_support
from .tail_estimation import tail_bracket, tail_estimate, tail_sketch_build

GENERATORS = ("zeros", "ones", "spikes", "spikes+gaussian-tail", "geometric-decay", "tones", "custom-file")


@dataclass(frozen=True)
class SignalSpec:
    """How to produce a test signal. ``noise`` is the per-coordinate tail
    scale for real generators and the off-support energy relative to the
    on-support energy for ``tones``."""

    generator: str
    n: int = 1024
    k: int = 1
    magnitude: float | None = None
    spike_factor: float = 10.0
    eps: float = 0.5
    noise: float = 1.0
    ratio: float = 0.5
    path: str | None = None
    support_path: str | None = None

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigurationError(f"unknown generator {self.generator!r}; choose from {', '.join(GENERATORS)}")
        if self.generator == "custom-file" and not self.path:
            raise ConfigurationError("custom-file generator needs a path")


@dataclass
class Generated:
    x: np.ndarray
    support: np.ndarray
    spectrum: np.ndarray | None = None


def _spike_positions(rng, n: int, k: int):
    pos = np.sort(rng.choice(n, size=min(k, n), replace=False))
    signs = rng.choice([-1.0, 1.0], size=pos.size)
    return pos, signs


def generate(spec: SignalSpec, seed: int) -> Generated:
    """Pure function of (spec, seed)."""
    n, k = spec.n, spec.k
    rng = rng_for(seed, "signal", spec.generator)
    if spec.generator == "custom-file":
        x = read_signal(spec.path)
        support = read_support(spec.support_path) if spec.support_path else head_set(x, k)
        return Generated(x, support)
    if spec.generator == "zeros":
        return Generated(np.zeros(n), np.zeros(0, dtype=np.int64))
    if spec.generator == "ones":
        return Generated(np.ones(n), np.arange(min(k, n), dtype=np.int64))
    if spec.generator == "geometric-decay":
        order = rng.permutation(n)
        x = np.zeros(n)
        x[order] = spec.ratio ** np.arange(n) * rng.choice([-1.0, 1.0], size=n)
        return Generated(x, head_set(x, k))
    if spec.generator == "spikes":
        pos, signs = _spike_positions(rng, n, k)
        mag = spec.magnitude
        if mag is None:
            # same spikes as the noisy generator, measured against a unit tail
            mag = spec.spike_factor * math.sqrt(spec.eps / k) * spec.noise * math.sqrt(max(n - k, 0))
        x = np.zeros(n)
        x[pos] = mag * signs
        return Generated(x, pos)
    if spec.generator == "spikes+gaussian-tail":
        pos, signs = _spike_positions(rng, n, k)
        x = spec.noise * rng.standard_normal(n)
        x[pos] = 0.0
        mag = spec.magnitude
        if mag is None:
            mag = spec.spike_factor * math.sqrt(spec.eps / k) * lp_norm(x, 2)
        x[pos] = mag * signs
        return Generated(x, pos)
    # tones: k unit tones with random phases, complex Gaussian noise elsewhere
    pos = np.sort(rng.choice(n, size=min(k, n), replace=False))
    spec_hat = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec_hat[pos] = 0.0
    energy = float(np.sum(np.abs(spec_hat) ** 2))
    if spec.noise > 0 and energy > 0:
        spec_hat *= math.sqrt(spec.noise * pos.size / energy)
    else:
        spec_hat[:] = 0.0
    spec_hat[pos] = np.exp(2j * np.pi * rng.random(pos.size))
    return Generated(idft(spec_hat), pos, spec_hat)


@dataclass
class TrialReport:
    trial: int
    seed: int
    success: bool | None
    metrics: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {"trial": self.trial, "seed": self.seed, "success": self.success, **self.metrics}

    def to_json(self) -> str:
        return json.dumps(self.as_record(), separators=(",", ":"))


BASE_COLUMNS = ("trial", "seed", "success")


def report_columns(records: list[dict]) -> list[str]:
    cols = list(BASE_COLUMNS)
    seen = set(cols)
    for rec in records:
        for key in rec:
            if key not in seen:
                seen.add(key)
                cols.append(key)
    return cols


def emit_report(reports, fmt: str = "json", comments: list[str] = ()) -> str:
    """Serialize reports. Non-string CSV cells hold JSON-encoded values so that
    parsing a CSV row gives back the JSON record; plain strings are written bare."""
    records = [r.as_record() if isinstance(r, TrialReport) else dict(r) for r in reports]
    if fmt == "json":
        lines = [json.dumps(rec, separators=(",", ":")) for rec in records]
        return "".join(line + "\n" for line in lines)
    if fmt != "csv":
        raise ConfigurationError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    cols = report_columns(records)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        writer.writerow([_cell(rec[c]) if c in rec else "" for c in cols])
    return buf.getvalue()


def _cell(v) -> str:
    return v if isinstance(v, str) else json.dumps(v, separators=(",", ":"))


def _uncell(v: str):
    try:
        return json.loads(v)
    except json.JSONDecodeError:
        return v


def parse_csv_report(text: str) -> list[dict]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        return []
    cols = rows[0]
    return [{c: _uncell(v) for c, v in zip(cols, row) if v != ""} for row in rows[1:]]


def trial_seed(master: int, trial: int) -> int:
    return derive_seed(master, "trial", trial)


class _Runner:
    def __init__(self, task, master):
        self.task, self.master = task, master

    def __call__(self, i):
        return self.task(i, trial_seed(self.master, i))


def run_trials(task, trials: int, seed: int, jobs: int = 1) -> list[TrialReport]:
    """Run task(i, trial_seed) for i < trials; results come back in trial order."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    runner = _Runner(task, seed)
    if jobs <= 1:
        return [runner(i) for i in range(trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(runner, range(trials), chunksize=max(1, trials // (4 * jobs))))


def summarize(reports: list[TrialReport], target: float | None = None, key: str = "success") -> dict:
    """Success frequency with its standard error and a +-3 stderr verdict."""
    flags = [bool(r.as_record()[key]) for r in reports if r.as_record().get(key) is not None]
    N = len(flags)
    p = sum(flags) / N if N else float("nan")
    se = stderr(p, N) if N else float("nan")
    out = {"type": "summary", "trials": N, "successes": int(sum(flags)), "frequency": p, "stderr": se}
    if target is not None:
        out["target"] = target
        out["threshold"] = target - 3 * se
        out["passed"] = bool(N and p >= target - 3 * se)
    return out


def _sketch_seed(seed: int, tag: str) -> int:
    return derive_seed(seed, "sketch", tag)


def _signal(spec: SignalSpec, seed: int) -> Generated:
    return generate(spec, derive_seed(seed, "signal"))


@dataclass(frozen=True)
class TailTask:
    spec: SignalSpec
    k: int
    p: int
    delta: float
    profile: ConstantProfile

    def __call__(self, trial: int, seed: int) -> TrialReport:
        x = _signal(self.spec, seed).x.real
        sk = tail_sketch_build(x, self.k, self.p, self.delta, _sketch_seed(seed, "tail"), self.profile.tail_m_mult)
        V = tail_estimate(sk)
        lo, hi = tail_bracket(x, self.k, self.p, self.profile.tail_C0)
        inside = lo <= V <= hi
        return TrialReport(trial, seed, inside, {
            "profile": self.profile.name, "V": V, "lower_bound": lo, "upper_bound": hi,
            "in_bracket": inside, "below": V < lo, "above": V > hi, "m": sk.m,
        })


@dataclass(frozen=True)
class IdentifyTask:
    spec: SignalSpec
    k: int
    eps: float
    profile: ConstantProfile
    timings: bool = False

    def __call__(self, trial: int, seed: int) -> TrialReport:
        x = _signal(self.spec, seed).x.real
        t0 = time.perf_counter()
        geom = forest_geometry(x.size, self.k, self.eps, self.profile)
        tail = tail_sketch_build(x, self.k, 2, TAIL_DELTA, _sketch_seed(seed, "tail"), self.profile.tail_m_mult)
        sk = forest_sketch_build(x, geom, _sketch_seed(seed, "forest"))
        dec = forest_decode(sk, tail_estimate(tail), self.profile)
        elapsed = time.perf_counter() - t0
        head = head_set(x, self.k)
        found = np.intersect1d(head, dec.support)
        lhs = lp_norm(x - restrict(x, found), 2) ** 2
        rhs = (1 + 3 * self.eps) * tail_norm(x, self.k) ** 2
        previous = [geom.tau] + dec.level_sizes[:-1]
        bound_ok = all(t <= p * geom.D * geom.R for t, p in zip(dec.buckets_touched, previous))
        metrics = {
            "profile": self.profile.name, "L": dec.support.tolist(), "L_size": int(dec.support.size),
            "level_sizes": dec.level_sizes, "buckets_touched": dec.buckets_touched,
            "head_found": int(found.size), "measurements": sk.measurements,
            "cover_ratio": lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf),
            "touch_bound_ok": bound_ok,
        }
        if self.timings:
            metrics["seconds"] = elapsed
        return TrialReport(trial, seed, lhs <= rhs, metrics)


@dataclass(frozen=True)
class PruneTask:
    spec: SignalSpec
    k: int
    eps: float
    profile: ConstantProfile
    candidates: tuple[int, ...] | None = None
    dump_estimates: bool = False

    def __call__(self, trial: int, seed: int) -> TrialReport:
        x = _signal(self.spec, seed).x.real
        if self.candidates is None:
            geom = forest_geometry(x.size, self.k, self.eps, self.profile)
            tail = tail_sketch_build(x, self.k, 2, TAIL_DELTA, _sketch_seed(seed, "tail"), self.profile.tail_m_mult)
            L = forest_decode(forest_sketch_build(x, geom, _sketch_seed(seed, "forest")), tail_estimate(tail), self.profile).support
        else:
            L = np.asarray(self.candidates, dtype=np.int64)
        sk = prune_sketch_build(x, self.k, self.eps, self.profile, _sketch_seed(seed, "prune"))
        S = prune(sk, L, self.k, self.profile)
        err = lp_norm(x - restrict(x, S), 2)
        bound = (1 + 5 * self.eps) * tail_norm(x, self.k)
        metrics = {"profile": self.profile.name, "S": S.tolist(), "S_size": int(S.size), "L_size": int(L.size),
                   "error": err, "bound": bound}
        if self.dump_estimates:
            metrics["estimates"] = dict(zip(map(str, L.tolist()), sk.estimates(L).tolist()))
        return TrialReport(trial, seed, err <= bound, metrics)


def read_stream(path) -> list[tuple[int, float]]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                i, d = line.split(",")
                out.append((int(i), float(d)))
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: expected 'i,delta'") from exc
    return out


@dataclass(frozen=True)
class SetQueryTask:
    spec: SignalSpec | None
    k: int
    eps: float
    profile: ConstantProfile
    n: int | None = None
    stream: tuple[tuple[int, float], ...] | None = None
    support: tuple[int, ...] | None = None

    def __call__(self, trial: int, seed: int) -> TrialReport:
        if self.stream is not None:
            n = self.n or (max(i for i, _ in self.stream) + 1 if self.stream else 1)
            x = np.zeros(n)
            sk = LayeredCountSketch.from_profile(n, self.k, self.eps, self.profile, _sketch_seed(seed, "set-query"))
            touches = set()
            for i, d in self.stream:
                touches.add(sk.update(i, d))
                x[i] += d
            S = np.asarray(self.support if self.support is not None else np.flatnonzero(x)[: self.k], dtype=np.int64)
        else:
            g = _signal(self.spec, seed)
            x = g.x.real
            n = x.size
            S = np.asarray(self.support, dtype=np.int64) if self.support is not None else g.support
            sk = LayeredCountSketch.from_profile(n, self.k, self.eps, self.profile, _sketch_seed(seed, "set-query"))
            off = x.copy()
            off[S] = 0.0
            sk.apply(off)
            touches = {sk.update(int(i), float(x[i])) for i in S}
        expected = max(1, math.ceil(math.log2(self.k) - 1e-12))
        touch_ok = touches <= {expected}
        est = sk.query(S)
        err = float(np.sum((est.values - x[est.indices]) ** 2))
        noise = complement_norm(x, S) ** 2
        ratio = err / noise if noise else (0.0 if err == 0 else math.inf)
        return TrialReport(trial, seed, err <= self.eps * noise, {
            "profile": self.profile.name, "error_sq": err, "noise_sq": noise, "err_ratio": ratio,
            "update_touches": sorted(touches), "expected_touches": expected, "touch_ok": touch_ok,
            "remaining": sk.last_trace.remaining, "x_prime": est.values.tolist(),
            "support": est.indices.tolist(), "measurements": sk.measurements,
        })


@dataclass(frozen=True)
class FourierTask:
    spec: SignalSpec
    k: int
    eps: float
    delta: float
    profile: ConstantProfile
    support: tuple[int, ...] | None = None

    def __call__(self, trial: int, seed: int) -> TrialReport:
        g = _signal(self.spec, seed)
        x = np.asarray(g.x, dtype=np.complex128)
        S = np.asarray(self.support, dtype=np.int64) if self.support is not None else g.support
        res = fourier_set_query(x, S, self.k, self.eps, self.delta, self.profile, _sketch_seed(seed, "fourier"))
        truth = naive_dft(x)
        err = float(np.sum(np.abs(res.estimate.values - truth[res.estimate.indices]) ** 2))
        off = complement_norm(truth, S) ** 2
        bound = self.eps * off + self.delta * float(np.sum(np.abs(truth))) ** 2
        return TrialReport(trial, seed, err <= bound, {
            "profile": self.profile.name, "error_sq": err, "offsupport_sq": off, "bound": bound,
            "err_ratio": err / off if off else (0.0 if err == 0 else math.inf),
            "samples": res.samples, "remaining": [r.remaining for r in res.rounds],
            "recovered": [r.recovered for r in res.rounds], "buckets": [r.B for r in res.rounds],
        })


@dataclass(frozen=True)
class RecoverTask:
    spec: SignalSpec
    k: int
    eps: float
    profile: ConstantProfile
    tol: float = 0.0
    timings: bool = False

    def __call__(self, trial: int, seed: int) -> TrialReport:
        x = _signal(self.spec, seed).x.real
        res = recover(x, PipelineConfig(self.k, self.eps, self.profile, _sketch_seed(seed, "pipeline")))
        err, tail = recovery_error(x, res.estimate, self.k)
        metrics = {
            "profile": self.profile.name,
            "err_ratio": err / tail if tail else (0.0 if err == 0 else math.inf),
            "abs_error": err, "tail_norm": tail, "measurements_total": res.measurements_total,
            "measurements": res.measurements, "candidates": int(res.candidates.size),
            "pruned": int(res.pruned.size),
        }
        if self.timings:
            metrics["timings"] = res.timings
        return TrialReport(trial, seed, err <= (1 + self.eps) * tail + self.tol, metrics)
