"""Brute-force references used by tests and the harness.

Nothing here is fast. Dense matrices are capped at n <= 2^12 and rows are
accumulated left to right, which is the same order the fast paths use, so
linear sketches can be compared for exact equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .errors import OracleSizeError
from .fourier import FlatFilter, SpectrumPermutation
from .identification import ForestSketch
from .pruning import PruneSketch
from .set_query import LayeredCountSketch
from .signal import fourier_err, support_set
from .tail_estimation import TailSketch

MAX_DENSE_N = 1 << 12


def _cap(n: int) -> None:
    if n > MAX_DENSE_N:
        raise OracleSizeError(f"oracle limited to n <= {MAX_DENSE_N}, got n = {n}")


def naive_dft(x, block: int = 32) -> np.ndarray:
    """O(n^2) unitary DFT.

    Within blocks of ``block`` consecutive samples the sum is evaluated by
    Horner's rule in w_i = e^{-2 pi i i / n}; each block is then rotated by
    an exactly tabulated twiddle, which keeps rounding error at the level of
    a single block.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    table = np.exp(-2j * np.pi * np.arange(n) / n)
    i = np.arange(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.complex128)
    acc = np.empty(n, dtype=np.complex128)
    for j0 in range(0, n, block):
        acc[:] = 0
        for j in range(min(n, j0 + block) - 1, j0 - 1, -1):
            acc *= table
            acc += x[j]
        out += acc * table[np.mod(i * j0, n)]
    return out / np.sqrt(n) if n else out


def naive_idft(x_hat) -> np.ndarray:
    return np.conj(naive_dft(np.conj(np.asarray(x_hat, dtype=np.complex128))))


@singledispatch
def dense_matrix(sketch) -> np.ndarray:
    raise TypeError(f"no dense form for {type(sketch).__name__}")


@dense_matrix.register
def _(sk: ForestSketch) -> np.ndarray:
    g = sk.geom
    _cap(g.n)
    coords = np.arange(g.n)
    M = np.zeros((g.H, g.R, g.B, g.n))
    for level in range(1, g.H + 1):
        ids = g.interval_of(level, coords)
        for r in range(g.R):
            M[level - 1, r, sk.hash(level, r)(ids), coords] = sk.gaussian(level, r).gaussian(coords)
    return M.reshape(-1, g.n)


@dense_matrix.register
def _(sk: PruneSketch) -> np.ndarray:
    _cap(sk.n)
    coords = np.arange(sk.n)
    M = np.zeros((sk.R, sk.B, sk.n))
    for r, h in enumerate(sk.hashes):
        M[r, h(coords), coords] = sk.gaussian(r).gaussian(coords)
    return M.reshape(-1, sk.n)


@dense_matrix.register
def _(sk: LayeredCountSketch) -> np.ndarray:
    _cap(sk.n)
    coords = np.arange(sk.n)
    M = np.zeros((sk.measurements, sk.n))
    for off, h, s in zip(sk.offsets[:-1], sk.hashes, sk.signs):
        M[off + h(coords), coords] = s(coords)
    return M


@dense_matrix.register
def _(sk: TailSketch) -> np.ndarray:
    _cap(sk.n)
    return np.stack([sk.row(t) for t in range(sk.m)])


def hash_to_bins_matrix(perm: SpectrumPermutation, filt: FlatFilter) -> np.ndarray:
    """Dense B x n map from x to the folded filter inputs."""
    _cap(filt.n)
    M = np.zeros((filt.B, filt.n), dtype=np.complex128)
    t = filt.taps
    M[np.mod(t, filt.B), perm.time_index(t)] = filt.values * perm.time_phase(t)
    return M


def dense_sketch_apply(M, x) -> np.ndarray:
    """Row-by-row sum of M[r, i] * x[i] in increasing i."""
    M = np.asarray(M)
    x = np.asarray(x)
    _cap(M.shape[1])
    if M.shape[0] == 0:
        return np.zeros(0, dtype=np.result_type(M, x))
    out = np.empty(M.shape[0], dtype=np.result_type(M, x))
    step = max(1, (1 << 22) // max(M.shape[1], 1))
    for start in range(0, M.shape[0], step):
        block = M[start:start + step] * x
        out[start:start + step] = np.cumsum(block, axis=1)[:, -1]
    return out


def exact_noise_event(x_hat, z_hat, S, sigma: int, b: int, B: int, alpha: float, k: int, i: int) -> bool:
    """||r_{h^{-1}(h(i)) minus S}||^2 >= Err^2(r, k) / (alpha B) with r = x_hat - z_hat.

    Both sides zero counts as no noise.
    """
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    n = x_hat.size
    _cap(n)
    r = x_hat - z_hat.to_dense(np.complex128)
    perm = SpectrumPermutation(n, sigma, 0, b)
    coords = np.arange(n)
    same = perm.bins(coords, B) == perm.bins(i, B)
    same[support_set(S, n)] = False
    lhs = float(np.sum(np.abs(r[same]) ** 2))
    rhs = fourier_err(r, k) ** 2 / (alpha * B)
    if lhs == 0 and rhs == 0:
        return False
    return lhs >= rhs


@dataclass(frozen=True)
class OracleReport:
    name: str
    oracle: float
    fast: float
    abs_dev: float
    rel_dev: float

    @property
    def exact(self) -> bool:
        return self.abs_dev == 0

    def as_dict(self) -> dict:
        return {"name": self.name, "oracle": self.oracle, "fast": self.fast,
                "abs_dev": self.abs_dev, "rel_dev": self.rel_dev, "exact": self.exact}


def compare(name: str, oracle_value, fast_value) -> OracleReport:
    o = np.asarray(oracle_value)
    f = np.asarray(fast_value)
    if o.shape != f.shape:
        raise AssertionError(f"{name}: shape {o.shape} vs {f.shape}")
    dev = float(np.max(np.abs(o - f))) if o.size else 0.0
    scale = float(np.max(np.abs(o))) if o.size else 0.0
    return OracleReport(name, scale, float(np.max(np.abs(f))) if f.size else 0.0, dev, dev / scale if scale else dev)
