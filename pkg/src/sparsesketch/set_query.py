"""Layered count-sketch for the set-query problem.

Layer i (1-based) has B_i = ceil(C k gamma^i / (eps (10 gamma)^i)) buckets,
a pairwise hash h_i and a pairwise sign sigma_i. A query peels the support:
at each layer the members of S that sit alone in their bucket are estimated
as sigma_i(j) * bucket, and their estimated contribution is subtracted from
every layer before moving on.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .hashing import PairwiseHash, SignFunction, derive_seed
from .profiles import ConstantProfile
from .signal import SparseApprox, support_set


@dataclass
class QueryTrace:
    remaining: list[int] = field(default_factory=list)
    recovered: list[int] = field(default_factory=list)
    rounds: list[np.ndarray] = field(default_factory=list, repr=False)
    touches: int = 0


class LayeredCountSketch:
    """Streaming linear sketch y = Phi x with O(log k) layers."""

    def __init__(self, n: int, k: int, eps: float, C: float, gamma: float, seed: int = 0):
        if n < 1 or k < 1:
            raise DomainError("need n >= 1 and k >= 1")
        if not (0 < eps < 1):
            raise DomainError("eps must lie in (0, 1)")
        self.n, self.k, self.eps = int(n), int(k), float(eps)
        self.C, self.gamma, self.seed = float(C), float(gamma), int(seed)
        self.num_layers = max(1, math.ceil(math.log2(k) - 1e-12))
        self.layer_k, self.layer_eps, self.buckets = [], [], []
        for i in range(1, self.num_layers + 1):
            k_i = k * gamma**i
            eps_i = eps * (10 * gamma) ** i
            self.layer_k.append(math.ceil(k_i - 1e-12))
            self.layer_eps.append(eps_i)
            self.buckets.append(max(1, math.ceil(C * k_i / eps_i - 1e-9)))
        self.offsets = np.concatenate([[0], np.cumsum(self.buckets)]).astype(np.int64)
        self.hashes = [
            PairwiseHash(derive_seed(seed, "set-query", "h", i), b) for i, b in enumerate(self.buckets)
        ]
        self.signs = [SignFunction(derive_seed(seed, "set-query", "s", i)) for i in range(self.num_layers)]
        self.y = np.zeros(int(self.offsets[-1]))
        self.update_touches = 0
        self.last_trace: QueryTrace | None = None

    @classmethod
    def from_profile(cls, n: int, k: int, eps: float, profile: ConstantProfile, seed: int = 0):
        return cls(n, k, eps, profile.sq_C, profile.sq_gamma, seed)

    @property
    def measurements(self) -> int:
        return int(self.y.size)

    def cells(self, coords) -> tuple[np.ndarray, np.ndarray]:
        """Row index and sign of each coordinate in every layer: (layers, len)."""
        coords = np.asarray(coords, dtype=np.int64)
        rows = np.stack([off + h(coords) for off, h in zip(self.offsets[:-1], self.hashes)])
        signs = np.stack([s(coords) for s in self.signs])
        return rows, signs

    def update(self, i: int, delta: float) -> int:
        """Add delta * Phi e_i to y; returns the number of buckets touched."""
        if not (0 <= i < self.n):
            raise DomainError(f"index {i} outside [0, {self.n})")
        rows, signs = self.cells(np.array([i]))
        self.y[rows[:, 0]] += signs[:, 0] * delta
        self.update_touches += rows.shape[0]
        return rows.shape[0]

    def apply(self, x) -> "LayeredCountSketch":
        """Batch update y += Phi x."""
        x = np.asarray(x, dtype=np.float64)
        if x.size != self.n:
            raise DomainError("signal length mismatch")
        nz = np.flatnonzero(x)
        rows, signs = self.cells(nz)
        for layer in range(self.num_layers):
            np.add.at(self.y, rows[layer], signs[layer] * x[nz])
        return self

    def query(self, S) -> SparseApprox:
        S = support_set(S, self.n)
        if S.size > self.k:
            raise DomainError(f"|S| = {S.size} exceeds the sketch capacity k = {self.k}")
        trace = QueryTrace()
        est = np.zeros(S.size)
        if S.size == 0:
            self.last_trace = trace
            return SparseApprox(self.n, S, est)
        residual = self.y.copy()
        rows, signs = self.cells(S)
        alive = np.arange(S.size)
        for layer in range(self.num_layers):
            trace.remaining.append(int(alive.size))
            if alive.size == 0:
                trace.recovered.append(0)
                trace.rounds.append(np.zeros(0, dtype=np.int64))
                continue
            r = rows[layer, alive]
            counts = np.bincount(r - self.offsets[layer], minlength=self.buckets[layer])
            isolated = alive[counts[r - self.offsets[layer]] == 1]
            trace.touches += int(alive.size)
            vals = signs[layer, isolated] * residual[rows[layer, isolated]]
            est[isolated] = vals
            for other in range(self.num_layers):
                np.subtract.at(residual, rows[other, isolated], signs[other, isolated] * vals)
            trace.touches += int(isolated.size * self.num_layers)
            trace.recovered.append(int(isolated.size))
            trace.rounds.append(S[isolated])
            alive = np.setdiff1d(alive, isolated, assume_unique=True)
        trace.remaining.append(int(alive.size))
        self.last_trace = trace
        return SparseApprox(self.n, S, est)

    def save(self, path) -> None:
        meta = {
            "n": self.n, "k": self.k, "eps": self.eps, "C": self.C,
            "gamma": self.gamma, "seed": self.seed, "y": self.y.tolist(),
        }
        Path(path).write_text(json.dumps(meta))

    @classmethod
    def load(cls, path) -> "LayeredCountSketch":
        meta = json.loads(Path(path).read_text())
        sk = cls(meta["n"], meta["k"], meta["eps"], meta["C"], meta["gamma"], meta["seed"])
        y = np.asarray(meta["y"], dtype=np.float64)
        if y.size != sk.y.size:
            raise DomainError("stored measurement vector does not match layer layout")
        sk.y = y
        return sk


def sq_update(state: LayeredCountSketch, i: int, delta: float) -> LayeredCountSketch:
    state.update(i, delta)
    return state


def sq_query(state: LayeredCountSketch, S) -> SparseApprox:
    return state.query(S)
