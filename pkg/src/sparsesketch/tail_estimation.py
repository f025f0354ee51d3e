"""Tail-energy estimation from Bernoulli-subsampled p-stable measurements.

Each repetition t keeps coordinate i with probability 1/(100k) and forms
y_t = sum_i delta_{i,t} g_{i,t} x_i. The lower median of |y_t|^2 (p=2) or
|y_t| (p=1) is the estimate V.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .hashing import CounterRNG, StableSampler, derive_seed
from .signal import tail_norm


def repetitions(delta: float, multiplier: float = 8.0) -> int:
    return max(1, math.ceil(multiplier * math.log2(1.0 / delta)))


def lower_median(values, axis=None):
    """Element ranked ceil(m/2) in sorted order (the lower median)."""
    v = np.sort(np.asarray(values), axis=axis if axis is not None else -1)
    if axis is None:
        v = v.ravel()
        if v.size == 0:
            raise DomainError("median of an empty sequence")
        return v[(v.size - 1) // 2]
    m = v.shape[axis]
    return np.take(v, (m - 1) // 2, axis=axis)


@dataclass
class TailSketch:
    n: int
    k: int
    p: int
    delta: float
    seed: int
    m: int
    rate: float
    y: np.ndarray = field(repr=False)

    def keys(self, t: int) -> tuple[int, int]:
        return (derive_seed(self.seed, "tail", "keep", t), derive_seed(self.seed, "tail", "stable", t))

    def row(self, t: int, coords: np.ndarray | None = None) -> np.ndarray:
        """Dense row t of the measurement matrix (zeros where unsampled)."""
        if coords is None:
            coords = np.arange(self.n, dtype=np.int64)
        keep_key, g_key = self.keys(t)
        keep = CounterRNG(keep_key).bernoulli(coords, self.rate)
        return np.where(keep, StableSampler(self.p, g_key)(coords), 0.0)

    def kept(self, t: int) -> np.ndarray:
        keep_key, _ = self.keys(t)
        coords = np.arange(self.n, dtype=np.int64)
        return coords[CounterRNG(keep_key).bernoulli(coords, self.rate)]

    @property
    def measurements(self) -> int:
        return self.m


def tail_sketch_build(x, k: int, p: int = 2, delta: float = 0.01, seed: int = 0, m_mult: float = 8.0) -> TailSketch:
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if k < 1 or k > n:
        raise DomainError(f"k must lie in [1, n={n}], got {k}")
    if p not in (1, 2):
        raise DomainError("p must be 1 or 2")
    if not (0 < delta < 0.5):
        raise DomainError("delta must lie in (0, 1/2)")
    sk = TailSketch(n, k, p, delta, seed, repetitions(delta, m_mult), 1.0 / (100 * k), np.zeros(0))
    y = np.zeros(sk.m)
    nz = np.flatnonzero(x)
    for t in range(sk.m):
        keep_key, g_key = sk.keys(t)
        chosen = nz[CounterRNG(keep_key).bernoulli(nz, sk.rate)]
        if chosen.size:
            y[t] = np.cumsum(StableSampler(p, g_key)(chosen) * x[chosen])[-1]
    sk.y = y
    return sk


def tail_estimate(sk: TailSketch) -> float:
    if sk.y.size == 0:
        raise DomainError("empty tail sketch")
    a = np.abs(sk.y)
    return float(lower_median(a * a if sk.p == 2 else a))


def tail_bracket(x, k: int, p: int, C0: float) -> tuple[float, float]:
    """Target interval [(1/(10k))||x_{-C0 k}||_p^p, (1/k)||x_{-k}||_p^p]."""
    s = int(math.ceil(C0 * k))
    lo = tail_norm(x, s, p) ** p / (10 * k)
    hi = tail_norm(x, k, p) ** p / k
    return lo, hi


def sampled_mass(x, sk: TailSketch) -> np.ndarray:
    """Delta_t = (sum_i delta_{i,t} |x_i|^p)^(1/p) for each repetition."""
    x = np.asarray(x)
    return np.array([np.sum(np.abs(x[sk.kept(t)]) ** sk.p) ** (1.0 / sk.p) for t in range(sk.m)])
