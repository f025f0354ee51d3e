import numpy as np
import pytest
from hypothesis import settings

from sparsesketch.profiles import DESK

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture
def desk():
    return DESK


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def at_least(successes: int, trials: int, target: float) -> bool:
    """Frequency >= target - 3 standard errors."""
    p = successes / trials
    return p >= target - 3 * np.sqrt(max(p * (1 - p), 0) / trials)
