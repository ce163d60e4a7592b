import numpy as np
import pytest
from hypothesis import settings

from poco.core import LossRound

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


def quadratic(center, scale=1.0, t=0, lipschitz=None):
    """``scale * ||x - center||^2`` as a LossRound."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return LossRound(
        t,
        lambda x: scale * float((x - c) @ (x - c)),
        lambda x: 2.0 * scale * (x - c),
        lipschitz=2.0 * scale if lipschitz is None else lipschitz,
    )


def linear(c, t=0):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return LossRound(t, lambda x: float(c @ x), lambda x: c.copy())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
