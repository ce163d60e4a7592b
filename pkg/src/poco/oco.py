"""Baseline online steppers: OGD, sigma-OGD and optimistic mirror descent.

Steppers only see gradients, never loss values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from poco.core import BoxSet


@dataclass(frozen=True)
class OgdParams:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("OGD step size must be positive")

    @classmethod
    def for_horizon(cls, T: int, diameter: Optional[float] = None,
                    grad_bound: Optional[float] = None, scale: float = 1.0) -> "OgdParams":
        """Step ``D / (G sqrt(T))`` when both hints exist, else ``scale / sqrt(T)``."""
        if diameter is not None and grad_bound:
            return cls(diameter / (grad_bound * math.sqrt(T)))
        return cls(scale / math.sqrt(T))


@dataclass(frozen=True)
class SigmaOgdParams:
    eta: float
    gamma: float
    sigma: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("sigma-OGD eta must lie in (0, 1]")
        if not self.gamma > 0:
            raise ValueError("sigma-OGD gamma must be positive")


@dataclass(frozen=True)
class OmdState:
    """Secondary iterate of optimistic mirror descent (Euclidean mirror map)."""

    y: np.ndarray
    eta: float


def ogd_step(x, grad, params: OgdParams, set: BoxSet) -> np.ndarray:
    x, grad = set.check(x), set.check(grad)
    return set.project(x - params.eta * grad)


def sigma_ogd_step(x, grad, params: SigmaOgdParams, set: BoxSet) -> np.ndarray:
    x, grad = set.check(x), set.check(grad)
    target = set.project(x - grad / params.gamma)
    if params.eta == 1.0:
        return target
    return x + params.eta * (target - x)


def omd_step(state: OmdState, revealed_grad, hint_grad, set: BoxSet):
    """One optimistic step: move the secondary iterate on the revealed
    gradient, then play a step from it along the hint.

    Returns ``(played, new_state)``.
    """
    y = set.project(set.check(state.y) - state.eta * set.check(revealed_grad))
    played = set.project(y - state.eta * set.check(hint_grad))
    return played, OmdState(y=y, eta=state.eta)
