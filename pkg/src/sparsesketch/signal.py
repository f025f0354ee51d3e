"""Dense signals, sparse approximations and the norms used throughout.

Indices are 0-based. Real signals are float64, complex ones complex128.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def as_signal(x) -> np.ndarray:
    """Return a read-only float64/complex128 copy of ``x``."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DomainError("signals are one-dimensional")
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    out = np.array(arr, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


def support_set(indices, n: int | None = None) -> np.ndarray:
    """Sorted, duplicate-free int64 index array."""
    idx = np.unique(np.asarray(indices, dtype=np.int64).ravel())
    if n is not None and idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise DomainError(f"support index out of range [0, {n})")
    return idx


@dataclass(frozen=True)
class SparseApprox:
    """Sparse vector of length ``n`` given by (index, value) pairs."""

    n: int
    indices: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        vals = np.asarray(self.values)
        if idx.shape != vals.shape or idx.ndim != 1:
            raise DomainError("indices and values must be matching 1-d arrays")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise DomainError("index out of range")
        if np.unique(idx).size != idx.size:
            raise DomainError("duplicate indices in sparse approximation")
        order = np.argsort(idx, kind="stable")
        object.__setattr__(self, "indices", idx[order])
        object.__setattr__(self, "values", vals[order])

    @classmethod
    def empty(cls, n: int, dtype=np.float64) -> "SparseApprox":
        return cls(n, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=dtype))

    @classmethod
    def from_dense(cls, x, support) -> "SparseApprox":
        x = np.asarray(x)
        s = support_set(support, x.size)
        return cls(x.size, s, x[s].copy())

    def __len__(self) -> int:
        return int(self.indices.size)

    @property
    def support(self) -> np.ndarray:
        return self.indices

    def to_dense(self, dtype=None) -> np.ndarray:
        dtype = dtype or np.result_type(self.values.dtype, np.float64)
        out = np.zeros(self.n, dtype=dtype)
        out[self.indices] = self.values
        return out

    def as_dict(self) -> dict[int, complex | float]:
        return {int(i): v.item() for i, v in zip(self.indices, self.values)}


def lp_norm(x, p: float = 2.0) -> float:
    """(sum |x_i|^p)^(1/p) for p in (0, 2]."""
    if not (0 < p <= 2):
        raise DomainError(f"p must lie in (0, 2], got {p}")
    a = np.abs(np.asarray(x))
    if a.size == 0:
        return 0.0
    if p == 2:
        return float(np.sqrt(np.sum(a * a)))
    if p == 1:
        return float(np.sum(a))
    return float(np.sum(a**p) ** (1.0 / p))


def head_set(x, k: int) -> np.ndarray:
    """Indices of the k largest |x_i|, ties broken toward the smaller index.

    k larger than n is clamped to n. Returned sorted by index.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    a = np.abs(np.asarray(x))
    k = min(int(k), a.size)
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    # lexsort: last key is primary, so sort by -|x| then by index
    order = np.lexsort((np.arange(a.size), -a))
    return np.sort(order[:k]).astype(np.int64)


def tail_norm(x, k: int, p: float = 2.0) -> float:
    """||x_{-k}||_p, the norm of x with its k largest entries removed."""
    x = np.asarray(x)
    mask = np.ones(x.size, dtype=bool)
    mask[head_set(x, k)] = False
    return lp_norm(x[mask], p)


def fourier_err(x_hat, k: int) -> float:
    """Err(x_hat, k): l2 distance to the best k-sparse approximation."""
    return tail_norm(x_hat, k, 2.0)


def restrict(x, support) -> np.ndarray:
    """x_S: copy of x with every coordinate outside ``support`` zeroed."""
    x = np.asarray(x)
    out = np.zeros_like(x)
    s = support_set(support, x.size)
    out[s] = x[s]
    return out


def complement_norm(x, support) -> float:
    """||x_{[n] minus S}||_2."""
    x = np.asarray(x)
    mask = np.ones(x.size, dtype=bool)
    mask[support_set(support, x.size)] = False
    return lp_norm(x[mask], 2.0)
