"""Named constant profiles.

``paper`` holds the constants the analysis needs; at laptop-scale n they
produce sketches wider than the signal, so ``desk`` holds small constants
for which the guarantees are checked empirically.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ConfigurationError

PROFILE_ENV = "SKETCH_PROFILE"


@dataclass(frozen=True)
class ConstantProfile:
    name: str
    # identification forest
    forest_C_H: float
    forest_C_R: float
    forest_C_B: float
    forest_C0: float
    forest_C_L: float
    forest_eta: float
    forest_zeta: float
    # pruning
    prune_C_R: float
    prune_C_B: float
    prune_C_g: float
    prune_C_L: float
    prune_alpha: float
    prune_beta: float
    # set query
    sq_C: float
    sq_gamma: float
    # fourier set query: alpha_i = 1 / (divisor * i**power)
    fourier_C: float
    fourier_gamma: float
    fourier_alpha_divisor: float
    fourier_alpha_power: float
    fourier_min_rounds: int
    # tail estimation
    tail_C0: float
    tail_m_mult: float
    tail_alpha: float
    tail_beta: float

    def with_overrides(self, **overrides) -> "ConstantProfile":
        known = {f.name for f in dataclasses.fields(self)}
        bad = sorted(set(overrides) - known)
        if bad:
            raise ConfigurationError(f"unknown profile constant(s): {', '.join(bad)}")
        coerced = {}
        for key, value in overrides.items():
            current = getattr(self, key)
            if key == "name":
                coerced[key] = str(value)
            elif isinstance(current, int) and not isinstance(current, bool):
                coerced[key] = int(value)
            else:
                coerced[key] = float(value)
        return dataclasses.replace(self, **coerced)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


PAPER = ConstantProfile(
    name="paper",
    forest_C_H=4,
    forest_C_R=100,
    forest_C_B=1e5,
    forest_C0=1e3,
    forest_C_L=1e4,
    forest_eta=1 / 9,
    forest_zeta=1 / 4000,
    prune_C_R=1e4 + 500 * 1e4,
    prune_C_B=5e5,
    prune_C_g=4 / 5,
    prune_C_L=1e4,
    prune_alpha=5,
    prune_beta=100,
    sq_C=20,
    sq_gamma=1 / 600,
    fourier_C=1000,
    fourier_gamma=1 / 1000,
    fourier_alpha_divisor=100,
    fourier_alpha_power=3,
    fourier_min_rounds=1,
    tail_C0=1e3,
    tail_m_mult=8,
    tail_alpha=0.05,
    tail_beta=20,
)

DESK = ConstantProfile(
    name="desk",
    forest_C_H=2,
    forest_C_R=6,
    forest_C_B=8,
    forest_C0=10,
    forest_C_L=20,
    forest_eta=1 / 9,
    forest_zeta=1 / 4000,
    prune_C_R=6,
    prune_C_B=8,
    prune_C_g=4 / 5,
    prune_C_L=20,
    prune_alpha=5,
    prune_beta=4,
    sq_C=64,
    sq_gamma=1 / 8,
    fourier_C=16,
    fourier_gamma=1 / 8,
    fourier_alpha_divisor=4,
    fourier_alpha_power=1,
    fourier_min_rounds=4,
    tail_C0=10,
    tail_m_mult=8,
    tail_alpha=0.05,
    tail_beta=20,
)

BUILTIN = {"paper": PAPER, "desk": DESK}


def parse_value(text: str):
    """Parse ints, floats and fractions such as ``1/9``."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        return text


def read_config(path) -> dict:
    """Read a ``key = value`` file. ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


def get_profile(name: str | None = None, overrides: dict | None = None) -> ConstantProfile:
    """Look up a built-in profile (default: $SKETCH_PROFILE, else desk)."""
    name = name or os.environ.get(PROFILE_ENV) or "desk"
    if name not in BUILTIN:
        raise ConfigurationError(f"unknown profile {name!r}; choose from {sorted(BUILTIN)}")
    profile = BUILTIN[name]
    if overrides:
        overrides = dict(overrides)
        overrides.pop("name", None)
        profile = profile.with_overrides(**overrides)
    return profile
