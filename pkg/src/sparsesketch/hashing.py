"""Seeded randomness: pairwise-independent hashes, signs, and
counter-based random-access Gaussian / Cauchy / Bernoulli samplers.

Everything here is a pure function of a 64-bit key. Keys are derived from a
master seed plus a tuple of tags (module name, repetition, level, ...), so a
given coordinate's random value never depends on evaluation order or on how
many other coordinates were drawn.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np
from scipy.special import ndtri

from .errors import DomainError

MERSENNE_61 = (1 << 61) - 1
U64_MASK = (1 << 64) - 1

_P = np.uint64(MERSENNE_61)
_LOW30 = np.uint64((1 << 30) - 1)
_LOW31 = (1 << 31) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def derive_seed(seed: int, *tags) -> int:
    """Deterministically mix a master seed with tags into a new u64 seed."""
    if not (0 <= int(seed) <= U64_MASK):
        raise DomainError("seeds are unsigned 64-bit integers")
    text = ":".join([str(int(seed))] + [str(t) for t in tags])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_for(seed: int, *tags) -> np.random.Generator:
    """A numpy Generator for bulk Monte Carlo draws keyed by (seed, tags)."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *tags)))


def _as_u64(idx) -> np.ndarray:
    arr = np.asarray(idx)
    if arr.dtype.kind == "i" and arr.size and arr.min() < 0:
        raise DomainError("coordinates must be non-negative")
    return arr.astype(np.uint64)


def _splitmix(key: int, idx: np.ndarray) -> np.ndarray:
    z = np.uint64(key) + (idx + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class CounterRNG:
    """Random-access stream: value at coordinate i is mix(key, i)."""

    def __init__(self, key: int):
        self.key = int(key) & U64_MASK

    def bits(self, idx) -> np.ndarray:
        return _splitmix(self.key, _as_u64(idx))

    def uniform(self, idx) -> np.ndarray:
        """Uniform on the open interval (0, 1), 53-bit resolution."""
        b = self.bits(idx) >> np.uint64(11)
        return (b.astype(np.float64) + 0.5) * (2.0**-53)

    def gaussian(self, idx) -> np.ndarray:
        return ndtri(self.uniform(idx))

    def cauchy(self, idx) -> np.ndarray:
        return np.tan(np.pi * (self.uniform(idx) - 0.5))

    def bernoulli(self, idx, rate: float) -> np.ndarray:
        return self.uniform(idx) < rate

    def sign(self, idx) -> np.ndarray:
        return 1.0 - 2.0 * (self.bits(idx) >> np.uint64(63)).astype(np.float64)


class StableSampler:
    """p-stable values (p=2 Gaussian, p=1 Cauchy) with random access."""

    def __init__(self, p: float, key: int):
        if p not in (1, 2):
            raise DomainError("only p in {1, 2} have stable samplers here")
        self.p = p
        self.rng = CounterRNG(key)

    def __call__(self, idx) -> np.ndarray:
        return self.rng.gaussian(idx) if self.p == 2 else self.rng.cauchy(idx)


def _mod_p(x: np.ndarray) -> np.ndarray:
    r = (x & _P) + (x >> np.uint64(61))
    return r - _P * (r >= _P).astype(np.uint64)


def mulmod61(a: int, i: np.ndarray) -> np.ndarray:
    """(a * i) mod (2^61 - 1) for a < 2^61 and uint64 i < 2^32, no overflow."""
    a_hi = np.uint64(a >> 31)
    a_lo = np.uint64(a & _LOW31)
    t = _mod_p(a_hi * i)
    # t * 2^31 mod p, using 2^61 = 1 (mod p)
    t = _mod_p(((t & _LOW30) << np.uint64(31)) + (t >> np.uint64(30)))
    return _mod_p(t + _mod_p(a_lo * i))


class PairwiseHash:
    """h(i) = ((a*i + b) mod p) mod B with p = 2^61 - 1."""

    def __init__(self, key: int, buckets: int):
        if buckets < 1:
            raise DomainError("need at least one bucket")
        self.buckets = int(buckets)
        mix = CounterRNG(key).bits(np.arange(2, dtype=np.uint64))
        self.a = 1 + int(mix[0]) % (MERSENNE_61 - 1)
        self.b = int(mix[1]) % MERSENNE_61

    def raw(self, idx) -> np.ndarray:
        i = _as_u64(idx)
        if i.size and int(i.max()) >= 1 << 32:
            raise DomainError("hash domain limited to 2^32 coordinates")
        return _mod_p(mulmod61(self.a, i) + np.uint64(self.b))

    def __call__(self, idx) -> np.ndarray:
        return (self.raw(idx) % np.uint64(self.buckets)).astype(np.int64)

    def reference(self, i: int) -> int:
        """Slow exact evaluation with Python integers."""
        return ((self.a * int(i) + self.b) % MERSENNE_61) % self.buckets


class SignFunction:
    """Pairwise-independent +-1 values: parity of a pairwise hash."""

    def __init__(self, key: int):
        self._h = PairwiseHash(key, 2)

    def __call__(self, idx) -> np.ndarray:
        return 1.0 - 2.0 * (self._h.raw(idx) & np.uint64(1)).astype(np.float64)


def stderr(p_hat: float, trials: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / trials)


def gaussian_tail_bounds_check(
    t: float = 0.5,
    trials: int = 10**6,
    seed: int = 0,
    band: tuple[float, float] = (5 / 12, 2.0),
) -> dict:
    """Empirical Pr[|g| <= t] and Pr[|g| in band] for standard Gaussians.

    The reference bounds are Pr[|g| <= t] <= (4/5) t and
    Pr[|g| in [5/12, 2]] >= 0.63.
    """
    if trials < 1:
        raise DomainError("trials must be positive")
    rng = rng_for(seed, "gaussian-fact")
    small = inband = 0
    done = 0
    while done < trials:
        m = min(1 << 20, trials - done)
        g = np.abs(rng.standard_normal(m))
        small += int(np.count_nonzero(g <= t))
        inband += int(np.count_nonzero((g >= band[0]) & (g <= band[1])))
        done += m
    p_small = small / trials
    p_band = inband / trials
    return {
        "t": t,
        "trials": trials,
        "p_small": p_small,
        "p_small_stderr": stderr(p_small, trials),
        "p_small_bound": 0.8 * t,
        "band": list(band),
        "p_band": p_band,
        "p_band_stderr": stderr(p_band, trials),
        "p_band_bound": 0.63,
    }


def biased_walk_return_freq(
    p_right: float,
    max_steps: int,
    trials: int,
    seed: int = 0,
    first_step: str = "right",
    chunk: int = 256,
) -> dict:
    """Fraction of +-1 walks from 0 (right with prob p_right) that come back
    to 0 within max_steps steps.

    With ``first_step="right"`` the first step is the conditioning step, so
    the remaining max_steps - 1 steps start at 1 and the limiting frequency
    is (1-p)/p. With ``"random"`` the first step is drawn like the rest and
    the limit is 2(1-p).
    """
    if not (0.5 < p_right <= 1):
        raise DomainError("p_right must lie in (1/2, 1]")
    if max_steps < 1 or trials < 1:
        raise DomainError("max_steps and trials must be positive")
    if first_step not in ("right", "random"):
        raise DomainError("first_step is 'right' or 'random'")
    rng = rng_for(seed, "random-walk", first_step)
    returned = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        steps = np.where(rng.random((m, max_steps)) < p_right, 1, -1).astype(np.int32)
        if first_step == "right":
            steps[:, 0] = 1
        pos = np.cumsum(steps, axis=1, out=steps)
        returned += int(np.count_nonzero((pos == 0).any(axis=1)))
        done += m
    freq = returned / trials
    q = 1 - p_right
    return {
        "p_right": p_right,
        "max_steps": max_steps,
        "trials": trials,
        "first_step": first_step,
        "frequency": freq,
        "stderr": stderr(freq, trials),
        "bound": q / p_right if first_step == "right" else 2 * q,
    }
