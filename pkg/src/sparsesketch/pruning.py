"""Pruning sketch: a Gaussian count-sketch whose median |bucket| values rank
the candidates in L; the top beta*k survive."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError
from .hashing import CounterRNG, PairwiseHash, derive_seed
from .identification import MAX_MEASUREMENTS
from .profiles import ConstantProfile
from .signal import support_set
from .tail_estimation import lower_median


@dataclass
class PruneSketch:
    n: int
    k: int
    eps: float
    R: int
    B: int
    seed: int
    y: np.ndarray = field(repr=False)

    @cached_property
    def hashes(self) -> list[PairwiseHash]:
        return [PairwiseHash(derive_seed(self.seed, "prune", "h", r), self.B) for r in range(self.R)]

    def gaussian(self, rep: int) -> CounterRNG:
        return CounterRNG(derive_seed(self.seed, "prune", "g", rep))

    @property
    def measurements(self) -> int:
        return self.B * self.R

    def estimates(self, L) -> np.ndarray:
        """z_i = lower median over repetitions of |y[r, h_r(i)]|."""
        L = np.asarray(L, dtype=np.int64)
        if L.size == 0:
            return np.zeros(0)
        vals = np.stack([np.abs(self.y[r, h(L)]) for r, h in enumerate(self.hashes)])
        return lower_median(vals, axis=0)


def prune_dimensions(k: int, eps: float, profile: ConstantProfile) -> tuple[int, int]:
    if k < 1 or not (0 < eps < 1):
        raise DomainError("need k >= 1 and eps in (0, 1)")
    R = max(1, math.ceil(profile.prune_C_R * math.log2(1 / eps) - 1e-9))
    B = max(1, math.ceil(profile.prune_C_B * k / eps - 1e-9))
    if R * B > MAX_MEASUREMENTS:
        raise ConfigurationError(f"prune sketch would need {R * B} measurements under profile {profile.name!r}")
    return R, B


def prune_sketch_build(x, k: int, eps: float, profile: ConstantProfile, seed: int = 0) -> PruneSketch:
    x = np.asarray(x, dtype=np.float64)
    R, B = prune_dimensions(k, eps, profile)
    sk = PruneSketch(x.size, k, eps, R, B, seed, np.zeros((R, B)))
    nz = np.flatnonzero(x)
    for r, h in enumerate(sk.hashes):
        sk.y[r] = np.bincount(h(nz), weights=sk.gaussian(r).gaussian(nz) * x[nz], minlength=B)
    return sk


def prune(sk: PruneSketch, L, k: int, profile: ConstantProfile) -> np.ndarray:
    """Keep the min(beta*k, |L|) members of L with the largest estimates."""
    L = support_set(L, sk.n)
    keep = min(int(math.ceil(profile.prune_beta * k)), L.size)
    if keep == L.size:
        return L
    z = sk.estimates(L)
    order = np.lexsort((L, -z))
    return np.sort(L[order[:keep]])
