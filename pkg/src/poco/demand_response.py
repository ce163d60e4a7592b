"""Demand-response fleet model for the regulation and curtailment studies.

Decisions are per-step energies in kWh: a load with power limit ``P`` kW
over a step of ``h`` seconds moves at most ``P * h / 3600`` kWh, so the
state of charge update ``s_t = s_{t-1} + x_t`` is dimensionally consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Literal, Tuple

import numpy as np
from scipy.optimize import brentq

from poco.core import BoxSet, LossRound

SignalKind = Literal["regulation", "curtailment"]


@dataclass(frozen=True)
class FleetParams:
    n_loads: int = 25
    step_seconds: float = 30.0
    power_range_kw: Tuple[float, float] = (1.0, 3.0)
    capacity_range_kwh: Tuple[float, float] = (10.0, 15.0)
    alpha: float = 1.0


@dataclass(frozen=True)
class Fleet:
    upper: np.ndarray  # kWh per step
    capacity: np.ndarray  # kWh
    state: np.ndarray  # kWh
    step_seconds: float = 30.0
    alpha: float = 1.0

    @property
    def n_loads(self) -> int:
        return self.upper.size

    @property
    def lower(self) -> np.ndarray:
        return -self.upper

    @cached_property
    def box(self) -> BoxSet:
        return BoxSet(-self.upper, self.upper)


def sample_fleet(params: FleetParams = FleetParams(), seed: int = 0) -> Fleet:
    rng = np.random.default_rng(seed)
    power = rng.uniform(*params.power_range_kw, size=params.n_loads)
    capacity = rng.uniform(*params.capacity_range_kwh, size=params.n_loads)
    return Fleet(
        upper=power * params.step_seconds / 3600.0,
        capacity=capacity,
        state=capacity / 2.0,
        step_seconds=params.step_seconds,
        alpha=params.alpha,
    )


def advance_state(fleet: Fleet, x, kind: SignalKind) -> Fleet:
    x = np.asarray(x, dtype=float)
    if kind == "regulation":
        return replace(fleet, state=fleet.state + x)
    if kind == "curtailment":
        return replace(fleet, state=fleet.alpha * fleet.state + x)
    raise ValueError(f"unknown signal kind {kind!r}")


def _clamped_multiplier(offset: np.ndarray, box: BoxSet, h) -> np.ndarray:
    """Solve ``h(mu) = 0`` for increasing ``h`` and return ``clip(offset + mu)``."""
    lo = float(np.min(box.lower - offset)) - 1.0
    hi = float(np.max(box.upper - offset)) + 1.0
    while h(lo) > 0:
        lo -= 2 * (hi - lo)
    while h(hi) < 0:
        hi += 2 * (hi - lo)
    if h(lo) == 0:
        mu = lo
    else:
        mu = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return np.clip(offset + mu, box.lower, box.upper)


def regulation_loss(fleet: Fleet, r_t: float, sigma: float, t: int = 0) -> LossRound:
    """``(r - 1'x)^2 + sigma ||s + x - c/2||^2``; sigma-strongly convex, L = 2N + 2 sigma."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    r_t = float(r_t)
    shift = fleet.state - fleet.capacity / 2.0

    def value(x):
        dev = shift + x
        return (r_t - x.sum()) ** 2 + sigma * (dev @ dev)

    def gradient(x):
        return -2.0 * (r_t - x.sum()) + 2.0 * sigma * (shift + x)

    def minimizer(box: BoxSet):
        # coordinates are clip(-shift + mu) with sigma mu = r - 1'x
        offset = -shift
        return _clamped_multiplier(
            offset, box, lambda mu: sigma * mu - r_t + np.clip(offset + mu, box.lower, box.upper).sum())

    n = fleet.n_loads
    return LossRound(t, value, gradient, lipschitz=2.0 * n + 2.0 * sigma, minimizer=minimizer)


def curtailment_loss(fleet: Fleet, p_t: float, sigma: float, t: int = 0) -> LossRound:
    """``([p - 1'x]^+)^2 + sigma ||alpha s + x - c/2||^2``.

    No Lipschitz hint is attached: only the backtracking gate is used on it.
    At the hinge the tracking term contributes a zero gradient.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if fleet.alpha < 1:
        raise ValueError("recovery coefficient alpha must be at least 1")
    p_t = float(p_t)
    shift = fleet.alpha * fleet.state - fleet.capacity / 2.0

    def value(x):
        short = max(p_t - x.sum(), 0.0)
        dev = shift + x
        return short * short + sigma * (dev @ dev)

    def gradient(x):
        return -2.0 * max(p_t - x.sum(), 0.0) + 2.0 * sigma * (shift + x)

    def minimizer(box: BoxSet):
        offset = -shift
        return _clamped_multiplier(
            offset, box,
            lambda mu: sigma * mu - max(p_t - np.clip(offset + mu, box.lower, box.upper).sum(), 0.0))

    return LossRound(t, value, gradient, minimizer=minimizer)


@dataclass(frozen=True)
class SignalModel:
    """Regulation ``0.2 sin(2 pi t / T) + w_t`` or curtailment ramp-then-plateau.

    Noise levels are variances of Gaussian perturbations. ``noise=False`` gives the clean signal.
    """

    kind: SignalKind
    horizon: int
    seed: int = 0
    noise: bool = True
    amplitude: float = 0.2
    noise_var: float = 0.01
    ramp_scale: float = 0.04
    ramp_exponent: float = 0.3
    plateau_noise_var: float = 0.001

    def __post_init__(self):
        if self.kind not in ("regulation", "curtailment"):
            raise ValueError(f"unknown signal kind {self.kind!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.noise_var < 0 or self.plateau_noise_var < 0:
            raise ValueError("noise variances must be nonnegative")

    @cached_property
    def _noise(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        z = rng.standard_normal(self.horizon)
        if not self.noise:
            return np.zeros(self.horizon)
        if self.kind == "regulation":
            return math.sqrt(self.noise_var) * z
        t = np.arange(1, self.horizon + 1)
        var = np.where(t <= self.horizon / 4, self.noise_var, self.plateau_noise_var)
        return np.sqrt(var) * z

    def clean(self, t: int) -> float:
        T = self.horizon
        if self.kind == "regulation":
            return self.amplitude * math.sin(2 * math.pi * t / T)
        return self.ramp_scale * min(t, T / 4) ** self.ramp_exponent

    def __call__(self, t: int) -> float:
        return generate_signal(self, t)


def generate_signal(model: SignalModel, t: int) -> float:
    if not 1 <= t <= model.horizon:
        raise ValueError(f"round {t} outside 1..{model.horizon}")
    return model.clean(t) + float(model._noise[t - 1])
