"""Simulated epsilon-forecasters of the next round's gradient."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

NoiseMode = Literal["uniform-ball", "fixed-radius-sphere", "zero"]
NOISE_MODES = ("uniform-ball", "fixed-radius-sphere", "zero")


@dataclass(frozen=True)
class NoiseSpec:
    mode: NoiseMode = "fixed-radius-sphere"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in NOISE_MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}; expected one of {NOISE_MODES}")


@dataclass(frozen=True)
class ForecastGradient:
    """Estimate ``g_t`` of the next gradient at the OCO output, error at most ``epsilon``.

    ``simulated`` is False for externally supplied forecasts, whose error
    bound is taken on trust.
    """

    estimate: np.ndarray
    epsilon: float
    at: Optional[np.ndarray] = None
    simulated: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("forecast error bound epsilon must be positive")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.estimate))


def unit_noise(mode: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Noise vector for ``epsilon = 1``; scale by the actual epsilon.

    Every mode consumes the same draws so streams stay paired across modes
    and epsilons.
    """
    direction = rng.standard_normal(n)
    u = rng.random()
    if mode == "zero":
        return np.zeros(n)
    nrm = np.linalg.norm(direction)
    direction = direction / nrm if nrm > 0 else np.eye(n)[0]
    if mode == "fixed-radius-sphere":
        return direction
    # uniform in the ball: radius law r^N on [0, 1]
    return direction * u ** (1.0 / n)


def forecast(true_next_grad, epsilon: float, noise: NoiseSpec,
             rng: Optional[np.random.Generator] = None, at=None) -> ForecastGradient:
    if not epsilon > 0:
        raise ValueError("forecast error bound epsilon must be positive")
    grad = np.asarray(true_next_grad, dtype=float)
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    e = epsilon * unit_noise(noise.mode, grad.size, rng)
    # Rounding in grad + e can push the realized error a hair over epsilon;
    # shrink until the stored estimate is inside the ball.
    est = grad + e
    for _ in range(60):
        realized = np.linalg.norm(est - grad)
        if realized <= epsilon:
            break
        e *= epsilon / realized * (1 - 1e-12)
        est = grad + e
    else:
        est = grad.copy()
    return ForecastGradient(est, float(epsilon), None if at is None else np.array(at, dtype=float))


class Forecaster:
    """Stateful simulated forecaster owning its random stream."""

    def __init__(self, epsilon: float, noise: NoiseSpec = NoiseSpec()):
        if not epsilon > 0:
            raise ValueError("forecast error bound epsilon must be positive")
        self.epsilon = float(epsilon)
        self.noise = noise
        self.rng = np.random.default_rng(noise.seed)

    def __call__(self, true_next_grad, at=None) -> ForecastGradient:
        return forecast(true_next_grad, self.epsilon, self.noise, rng=self.rng, at=at)


def descent_check(g: ForecastGradient) -> bool:
    """True iff ``||g|| > epsilon`` (strict), so ``-g`` is a descent direction."""
    return g.norm > g.epsilon
