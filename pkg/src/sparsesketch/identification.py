"""Interval-forest identification sketch and its top-down decoder.

The coordinates are split into tau trees of q consecutive coordinates. Level
l of a tree splits it into D^l intervals; level-l interval j of a tree covers
local positions [floor(j q / D^l), floor((j+1) q / D^l)). Children of global
interval id j at level l are ids j*D + p (p < D) at level l+1.

For level l and repetition r the sketch hashes interval ids into B buckets
and stores y[l, r, b] = sum over coordinates i whose level-l interval hashes
to b of g_{i,l,r} x_i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError
from .hashing import CounterRNG, PairwiseHash, derive_seed
from .profiles import ConstantProfile
from .tail_estimation import lower_median

MAX_MEASUREMENTS = 1 << 28


def _pow2_ceil(v: float) -> int:
    return 1 << max(0, math.ceil(math.log2(v) - 1e-12))


@dataclass(frozen=True)
class ForestGeometry:
    n: int
    k: int
    eps: float
    tau: int
    q: int
    D: int
    H: int
    R: int
    B: int
    cap: int

    def level_size(self, level: int) -> int:
        return self.tau * self.D**level

    def interval_of(self, level: int, coords) -> np.ndarray:
        """Global id of the level-``level`` interval holding each coordinate."""
        coords = np.asarray(coords, dtype=np.int64)
        t, pos = np.divmod(coords, self.q)
        width = self.D**level
        local = ((pos + 1) * width + self.q - 1) // self.q - 1
        return t * width + local

    def bounds(self, level: int, ids) -> tuple[np.ndarray, np.ndarray]:
        """Half-open coordinate range [start, end) of each interval id."""
        ids = np.asarray(ids, dtype=np.int64)
        width = self.D**level
        t, j = np.divmod(ids, width)
        start = t * self.q + (j * self.q) // width
        end = t * self.q + ((j + 1) * self.q) // width
        return np.minimum(start, self.n), np.minimum(end, self.n)

    def children(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        return (ids[:, None] * self.D + np.arange(self.D)).ravel()

    def parents(self, ids) -> np.ndarray:
        return np.asarray(ids, dtype=np.int64) // self.D

    @property
    def measurements(self) -> int:
        return self.B * self.H * self.R


def forest_geometry(n: int, k: int, eps: float, profile: ConstantProfile) -> ForestGeometry:
    if k < 1 or not (0 < eps < 1):
        raise DomainError("need k >= 1 and eps in (0, 1)")
    if k / eps > n / 16:
        raise ConfigurationError(
            f"the interval forest assumes k/eps <= n/16 (got k/eps = {k / eps:g}, n/16 = {n / 16:g})"
        )
    q = _pow2_ceil(n / (k / eps))
    if q < 16:
        raise ConfigurationError(f"tree size q = {q} is below the minimum of 16")
    tau = -(-n // q)
    lq = math.log2(q)
    llq = math.log2(lq)
    D = math.ceil(lq / llq - 1e-12)
    H = math.ceil(profile.forest_C_H * lq / llq - 1e-12)
    R = max(1, math.ceil(profile.forest_C_R * llq - 1e-12))
    B = max(1, math.ceil(profile.forest_C_B * k / eps - 1e-9))
    cap = max(1, math.ceil(profile.forest_C_L * k / eps - 1e-9))
    if B * H * R > MAX_MEASUREMENTS:
        raise ConfigurationError(
            f"forest sketch would need {B * H * R} measurements; profile {profile.name!r} is too large for n={n}"
        )
    return ForestGeometry(n, k, eps, tau, q, D, H, R, B, cap)


@dataclass
class ForestSketch:
    geom: ForestGeometry
    seed: int
    y: np.ndarray = field(repr=False)

    def hash(self, level: int, rep: int) -> PairwiseHash:
        return self._hashes[(level, rep)]

    def gaussian(self, level: int, rep: int) -> CounterRNG:
        return CounterRNG(derive_seed(self.seed, "forest", "g", level, rep))

    @cached_property
    def _hashes(self) -> dict:
        g = self.geom
        return {
            (l, r): PairwiseHash(derive_seed(self.seed, "forest", "h", l, r), g.B)
            for l in range(1, g.H + 1)
            for r in range(g.R)
        }

    @property
    def measurements(self) -> int:
        return int(self.y.size)


def forest_sketch_build(x, geom: ForestGeometry, seed: int = 0) -> ForestSketch:
    x = np.asarray(x, dtype=np.float64)
    if x.size != geom.n:
        raise DomainError("signal length does not match geometry")
    sk = ForestSketch(geom, seed, np.zeros((geom.H, geom.R, geom.B)))
    nz = np.flatnonzero(x)
    xv = x[nz]
    for level in range(1, geom.H + 1):
        ids = geom.interval_of(level, nz)
        for r in range(geom.R):
            w = sk.gaussian(level, r).gaussian(nz) * xv
            sk.y[level - 1, r] = np.bincount(sk.hash(level, r)(ids), weights=w, minlength=geom.B)
    return sk


@dataclass
class ForestDecode:
    support: np.ndarray
    level_sizes: list[int]
    buckets_touched: list[int]
    threshold: float
    truncated: list[bool]


def forest_decode(sk: ForestSketch, tail_value: float, profile: ConstantProfile) -> ForestDecode:
    """Walk the forest top-down, keeping children whose median squared
    bucket value reaches eta * eps * tail_value.

    With a zero threshold the test is strict, so an all-zero sketch yields
    an empty list.
    """
    g = sk.geom
    threshold = profile.forest_eta * g.eps * tail_value
    strict = threshold == 0
    T = np.arange(g.tau, dtype=np.int64)
    sizes, touched, truncated = [], [], []
    for level in range(1, g.H + 1):
        cand = g.children(T)
        start, end = g.bounds(level, cand)
        cand = cand[start < end]
        if cand.size == 0:
            T = cand
            sizes.append(0)
            touched.append(0)
            truncated.append(False)
            continue
        vals = np.stack([sk.y[level - 1, r, sk.hash(level, r)(cand)] for r in range(g.R)])
        z = lower_median(vals * vals, axis=0)
        keep = z > threshold if strict else z >= threshold
        T, zk = cand[keep], z[keep]
        cut = T.size > g.cap
        if cut:
            order = np.lexsort((T, -zk))[: g.cap]
            T = np.sort(T[order])
        sizes.append(int(T.size))
        touched.append(int(cand.size * g.R))
        truncated.append(bool(cut))
    start, end = g.bounds(g.H, T)
    if T.size and np.all(end - start == 1):
        support = start
    else:
        support = np.concatenate([np.arange(s, e) for s, e in zip(start, end)] or [np.zeros(0, np.int64)])
    return ForestDecode(np.unique(support.astype(np.int64)), sizes, touched, threshold, truncated)
