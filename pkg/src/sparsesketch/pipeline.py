"""End-to-end l2/l2 recovery: identify candidates, prune them, then read
off values with a set-query sketch. Every stage sees the same signal through
its own independently seeded linear sketch."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .hashing import derive_seed
from .identification import forest_decode, forest_geometry, forest_sketch_build
from .profiles import ConstantProfile
from .pruning import prune, prune_sketch_build
from .set_query import LayeredCountSketch
from .signal import SparseApprox, lp_norm, tail_norm
from .tail_estimation import tail_estimate, tail_sketch_build

TAIL_DELTA = 0.01


@dataclass(frozen=True)
class PipelineConfig:
    k: int
    eps: float
    profile: ConstantProfile
    seed: int = 0


@dataclass
class RecoveryResult:
    estimate: SparseApprox
    candidates: np.ndarray
    pruned: np.ndarray
    tail_value: float
    measurements: dict[str, int]
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def measurements_total(self) -> int:
        return sum(self.measurements.values())


def recover(x, cfg: PipelineConfig) -> RecoveryResult:
    x = np.asarray(x, dtype=np.float64)
    n, k, eps, prof = x.size, cfg.k, cfg.eps, cfg.profile
    clock = time.perf_counter
    timings = {}

    t0 = clock()
    tail = tail_sketch_build(x, k, 2, TAIL_DELTA, derive_seed(cfg.seed, "stage", "tail"), prof.tail_m_mult)
    v_bar = tail_estimate(tail)
    timings["tail"] = clock() - t0

    t0 = clock()
    geom = forest_geometry(n, k, eps / 10, prof)
    forest = forest_sketch_build(x, geom, derive_seed(cfg.seed, "stage", "forest"))
    L = forest_decode(forest, v_bar, prof).support
    timings["identify"] = clock() - t0

    t0 = clock()
    cap = math.ceil(prof.prune_beta * k)
    pr = prune_sketch_build(x, k, eps / 10, prof, derive_seed(cfg.seed, "stage", "prune"))
    S = L if L.size <= cap else prune(pr, L, k, prof)
    timings["prune"] = clock() - t0

    t0 = clock()
    sq = LayeredCountSketch.from_profile(n, cap, eps / 4, prof, derive_seed(cfg.seed, "stage", "set-query"))
    sq.apply(x)
    est = sq.query(S)
    timings["set_query"] = clock() - t0

    measurements = {
        "tail": tail.measurements,
        "identify": forest.measurements,
        "prune": pr.measurements,
        "set_query": sq.measurements,
    }
    return RecoveryResult(est, L, S, v_bar, measurements, timings)


def recovery_error(x, estimate: SparseApprox, k: int) -> tuple[float, float]:
    """(||x' - x||_2, ||x_{-k}||_2)."""
    x = np.asarray(x, dtype=np.float64)
    return lp_norm(estimate.to_dense(np.float64) - x, 2), tail_norm(x, k, 2)
