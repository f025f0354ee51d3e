"""Sparse Fourier set query over time-domain samples.

Conventions: the unitary DFT x_hat_f = n^{-1/2} sum_t x_t e^{-2 pi i f t / n};
the permutation (P x)_t = x_{sigma (t - a)} e^{-2 pi i sigma b t / n} moves
spectrum entry f to pi(f) = sigma (f - b) mod n and multiplies it by
e^{-2 pi i sigma a f / n}.  Bin h(f) = round_half_up(pi(f) B / n) mod B and
offset o(f) = pi(f) - h(f) n / B.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from .errors import DomainError
from .hashing import derive_seed, rng_for
from .profiles import ConstantProfile
from .signal import SparseApprox, support_set


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_pow2(n: int) -> None:
    if not is_pow2(n):
        raise DomainError(f"length {n} is not a power of two")


def dft(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    _check_pow2(x.size)
    return np.fft.fft(x, norm="ortho")


def idft(x_hat) -> np.ndarray:
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    _check_pow2(x_hat.size)
    return np.fft.ifft(x_hat, norm="ortho")


def _unit_phase(numer, n: int) -> np.ndarray:
    """exp(-2 pi i m / n) with m reduced mod n first for accuracy."""
    m = np.mod(np.asarray(numer, dtype=np.int64), n)
    return np.exp(-2j * np.pi * m / n)


@dataclass(frozen=True)
class SpectrumPermutation:
    n: int
    sigma: int
    a: int
    b: int

    def __post_init__(self):
        _check_pow2(self.n)
        if self.sigma % 2 == 0 and self.n > 1:
            raise DomainError("sigma must be odd so it is invertible mod n")

    @classmethod
    def random(cls, n: int, seed: int) -> "SpectrumPermutation":
        rng = rng_for(seed, "fourier", "perm")
        sigma = 2 * int(rng.integers(0, max(n // 2, 1))) + 1
        return cls(n, sigma % n if n > 1 else 0, int(rng.integers(0, n)), int(rng.integers(0, n)))

    def pi(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=np.int64)
        return np.mod(self.sigma * np.mod(f - self.b, self.n), self.n)

    def _round(self, f, B: int):
        p = self.pi(f)
        return p, (2 * p * B + self.n) // (2 * self.n)

    def bins(self, f, B: int) -> np.ndarray:
        _, h = self._round(f, B)
        return np.mod(h, B)

    def offsets(self, f, B: int) -> np.ndarray:
        p, h = self._round(f, B)
        o = p - h * (self.n // B)
        assert np.all(2 * np.abs(o) <= self.n // B), "offset exceeds half a bin"
        return o

    def time_index(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.int64)
        return np.mod(self.sigma * np.mod(t - self.a, self.n), self.n)

    def time_phase(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.int64)
        return _unit_phase(self.sigma * np.mod(self.b * np.mod(t, self.n), self.n), self.n)

    def apply(self, x) -> np.ndarray:
        t = np.arange(self.n)
        return np.asarray(x)[self.time_index(t)] * self.time_phase(t)

    def spectrum_phase(self, f) -> np.ndarray:
        """exp(-2 pi i sigma a f / n), the factor the permutation applies."""
        f = np.asarray(f, dtype=np.int64)
        return _unit_phase(self.sigma * np.mod(self.a * np.mod(f, self.n), self.n), self.n)


def permute_spectrum_check(x, sigma: int, a: int, b: int) -> float:
    """max_f |DFT(P x)_{pi(f)} - x_hat_f e^{-2 pi i sigma a f / n}| via naive DFTs."""
    from .oracle import naive_dft

    x = np.asarray(x, dtype=np.complex128)
    perm = SpectrumPermutation(x.size, sigma, a, b)
    lhs = naive_dft(perm.apply(x))
    f = np.arange(x.size)
    rhs = naive_dft(x) * perm.spectrum_phase(f)
    return float(np.max(np.abs(lhs[perm.pi(f)] - rhs)))


@dataclass(frozen=True)
class FlatFilter:
    n: int
    B: int
    alpha: float
    delta: float
    taps: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    ideal: np.ndarray = field(repr=False)
    realized: np.ndarray = field(repr=False)
    delta_filter: float = 0.0

    @property
    def support_size(self) -> int:
        return int(self.taps.size)

    @property
    def flat_edge(self) -> float:
        return (1 - self.alpha) * self.n / (2 * self.B)

    @property
    def stop_edge(self) -> float:
        return self.n / (2 * self.B)

    @property
    def support_constant(self) -> float:
        """c_f in |supp G| = c_f * B / alpha * log2(n / delta)."""
        return self.support_size / (self.B / self.alpha * math.log2(self.n / self.delta))

    def response(self, f) -> np.ndarray:
        return self.ideal[np.mod(np.asarray(f, dtype=np.int64), self.n)]


def _centered(n: int) -> np.ndarray:
    f = np.arange(n, dtype=np.int64)
    return np.where(f >= n // 2, f - n, f) if n > 1 else f


@lru_cache(maxsize=64)
def build_filter(n: int, B: int, delta: float, alpha: float) -> FlatFilter:
    """Gaussian-smoothed box in frequency, truncated in time.

    The target response is a box of half-width (1 - alpha/2) n/(2B) smoothed
    by a Gaussian narrow enough that it is within delta/8 of 1 on the flat
    region and of 0 past n/(2B). Its inverse DFT (a sinc times a Gaussian) is
    truncated to the shortest centered window whose dropped taps have l1 mass
    at most delta/4.
    """
    _check_pow2(n)
    if B < 2 or n % B:
        raise DomainError(f"B = {B} must be at least 2 and divide n = {n}")
    if not (0 < alpha < 1) or not (0 < delta < 1):
        raise DomainError("alpha and delta must lie in (0, 1)")
    flat = (1 - alpha) * n / (2 * B)
    stop = n / (2 * B)
    edge = 0.5 * (flat + stop)
    width = (stop - flat) / 2 / norm.isf(delta / 8)
    f = _centered(n).astype(np.float64)
    target = ndtr((edge - f) / width) - ndtr((-edge - f) / width)
    g = np.fft.ifft(target).real

    # tail[d] = l1 mass of taps with |t| > d
    dist = np.abs(_centered(n))
    mass = np.bincount(dist, weights=np.abs(g), minlength=n // 2 + 1)
    tail = np.concatenate([np.cumsum(mass[::-1])[::-1][1:], [0.0]])
    half = int(np.argmax(tail <= delta / 4))
    if 2 * half + 1 >= n:
        taps = _centered(n)
    else:
        taps = np.arange(-half, half + 1, dtype=np.int64)
    values = g[np.mod(taps, n)]

    kept = np.zeros(n)
    kept[np.mod(taps, n)] = values
    realized = np.fft.fft(kept)
    fc = np.abs(_centered(n))
    ideal = np.clip(realized.real, 0.0, 1.0)
    ideal[fc <= flat] = 1.0
    ideal[fc >= stop] = 0.0
    delta_filter = float(np.max(np.abs(realized - ideal)))
    if delta_filter > delta:
        raise AssertionError(f"filter error {delta_filter:.3g} exceeds delta = {delta:g}")
    for arr in (taps, values, ideal, realized):
        arr.flags.writeable = False
    return FlatFilter(n, B, alpha, delta, taps, values, ideal, realized, delta_filter)


def hash_to_bins_inputs(x, perm: SpectrumPermutation, filt: FlatFilter) -> np.ndarray:
    """Fold G . (P x) into B buckets: a_s = sum_{t = s mod B} G_t (P x)_t.

    Contributions are accumulated in increasing source-coordinate order.
    """
    x = np.asarray(x)
    t = filt.taps
    src = perm.time_index(t)
    coef = filt.values * perm.time_phase(t)
    c = coef * x[src]
    order = np.argsort(src, kind="stable")
    s = np.mod(t, filt.B)[order]
    c = c[order]
    return np.bincount(s, weights=c.real, minlength=filt.B) + 1j * np.bincount(
        s, weights=c.imag, minlength=filt.B
    )


def hash_to_bins(x, z_hat: SparseApprox | None, perm: SpectrumPermutation, filt: FlatFilter) -> np.ndarray:
    """u_j = sum_{h(f) = j} (x - z)^_f  G'_{-o(f)}  e^{-2 pi i sigma a f / n}, up to filter error."""
    n = filt.n
    if perm.n != n or np.asarray(x).size != n:
        raise DomainError("signal, permutation and filter lengths disagree")
    u = math.sqrt(n) * np.fft.fft(hash_to_bins_inputs(x, perm, filt))
    if z_hat is not None and len(z_hat):
        f = z_hat.indices
        corr = z_hat.values * filt.response(-perm.offsets(f, filt.B)) * perm.spectrum_phase(f)
        np.subtract.at(u, perm.bins(f, filt.B), corr)
    return u


@dataclass
class Estimate:
    values: SparseApprox
    isolated: np.ndarray
    samples: int
    perm: SpectrumPermutation


def estimate_values(x, z_hat, S, B: int, delta: float, alpha: float, seed: int) -> Estimate:
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    S = support_set(S, n)
    perm = SpectrumPermutation.random(n, seed)
    filt = build_filter(n, B, delta, alpha)
    u = hash_to_bins(x, z_hat, perm, filt)
    h = perm.bins(S, B)
    o = perm.offsets(S, B)
    counts = np.bincount(h, minlength=B)
    keep = (counts[h] == 1) & (np.abs(o) < filt.flat_edge)
    T = S[keep]
    w = u[h[keep]] * np.conj(perm.spectrum_phase(T))
    return Estimate(SparseApprox(n, T, w), T, filt.support_size, perm)


@dataclass
class FourierRound:
    B: int
    alpha: float
    remaining: int
    recovered: int
    samples: int


@dataclass
class FourierResult:
    estimate: SparseApprox
    rounds: list[FourierRound]
    history: list[SparseApprox] = field(default_factory=list, repr=False)

    @property
    def samples(self) -> int:
        return sum(r.samples for r in self.rounds)


def fourier_rounds(k: int, profile: ConstantProfile) -> int:
    base = math.ceil(math.log2(k) / math.log2(1 / profile.fourier_gamma) - 1e-12) + 1
    return max(base, int(profile.fourier_min_rounds))


def round_schedule(n: int, k: int, eps: float, profile: ConstantProfile, i: int) -> tuple[int, float]:
    """(B_i, alpha_i) for round i >= 1."""
    gamma = profile.fourier_gamma
    alpha = 1.0 / (profile.fourier_alpha_divisor * i**profile.fourier_alpha_power)
    if not (0 < alpha < 1):
        raise DomainError(f"alpha_{i} = {alpha} is outside (0, 1)")
    k_i = k * gamma**i
    eps_i = eps * (10 * gamma) ** i
    raw = profile.fourier_C * k_i / (alpha**2 * eps_i)
    B = 1 << max(1, math.ceil(math.log2(raw) - 1e-12)) if raw > 2 else 2
    return min(B, n), alpha


def fourier_set_query(x, S, k: int, eps: float, delta: float, profile: ConstantProfile, seed: int = 0) -> FourierResult:
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    _check_pow2(n)
    S = support_set(S, n)
    if k < 1 or S.size > k:
        raise DomainError("need k >= 1 and |S| <= k")
    if not (0 < eps < 1) or not (0 < delta < 1):
        raise DomainError("eps and delta must lie in (0, 1)")
    if n < 2:
        raise DomainError("need n >= 2")
    z = np.zeros(S.size, dtype=np.complex128)
    alive = S
    rounds, history = [], []
    for i in range(1, fourier_rounds(k, profile) + 1):
        if alive.size == 0:
            break
        B, alpha = round_schedule(n, k, eps, profile, i)
        current = SparseApprox(n, S, z.copy())
        est = estimate_values(x, current, alive, B, delta, alpha, derive_seed(seed, "fourier", "round", i))
        z[np.searchsorted(S, est.isolated)] += est.values.values
        rounds.append(FourierRound(B, alpha, int(alive.size), int(est.isolated.size), est.samples))
        alive = np.setdiff1d(alive, est.isolated, assume_unique=True)
        history.append(SparseApprox(n, S, z.copy()))
    return FourierResult(SparseApprox(n, S, z), rounds, history)


def event_frequencies(x_hat, S, B: int, alpha: float, trials: int, seed: int = 0, target: int | None = None, k: int | None = None) -> dict:
    """Empirical collision / large-offset / large-noise rates for one i in S
    over random (sigma, b); the noise event uses oracle residual energies."""
    from .oracle import exact_noise_event
    from .hashing import stderr

    x_hat = np.asarray(x_hat, dtype=np.complex128)
    n = x_hat.size
    S = support_set(S, n)
    if S.size == 0:
        raise DomainError("S must be nonempty")
    i = int(S[0] if target is None else target)
    k = S.size if k is None else k
    others = S[S != i]
    zero = SparseApprox.empty(n, np.complex128)
    flat = (1 - alpha) * n / (2 * B)
    coll = off = noise = 0
    for trial in range(trials):
        perm = SpectrumPermutation.random(n, derive_seed(seed, "events", trial))
        hi = int(perm.bins(i, B))
        coll += bool(others.size and np.any(perm.bins(others, B) == hi))
        off += bool(abs(int(perm.offsets(i, B))) >= flat)
        noise += exact_noise_event(x_hat, zero, S, perm.sigma, perm.b, B, alpha, k, i)
    out = {"trials": trials, "target": i, "B": B, "alpha": alpha, "size_S": int(S.size)}
    for name, count, bound in (
        ("collision", coll, 4 * S.size / B),
        ("offset", off, alpha),
        ("noise", noise, 4 * alpha),
    ):
        p = count / trials
        out[name] = {"frequency": p, "stderr": stderr(p, trials), "bound": bound}
    return out
