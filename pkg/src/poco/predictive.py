"""Gated predictive updates.

After the OCO stepper proposes ``x_bar``, a forecast ``g`` of the next
gradient at ``x_bar`` may be used for one more projected step. Two gates
decide whether that step is played:

* fixed step (needs an L-Lipschitz gradient): fire when ``||g|| > eps`` and
  the projected direction is at least ``eps/L + sqrt(eps^2/L^2 + 2 delta/L)``
  long, which guarantees an improvement of ``delta`` on the next loss.
* backtracking: search ``beta**m`` on the already revealed loss ``f_t`` for
  the online Armijo condition, which pays ``eps ||d||`` for the forecast
  error and ``2 Delta`` for the change between rounds.

When a gate does not fire the played decision is ``x_bar`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from poco.core import BoxSet, LossRound
from poco.forecaster import ForecastGradient, descent_check

GateReason = Literal["norm-gate-failed", "direction-too-short", "armijo-exhausted", "fired"]


@dataclass(frozen=True)
class FixedStepGateConfig:
    epsilon: float
    delta: float
    lipschitz: float
    beta: Optional[float] = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.lipschitz > 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.beta is None:
            object.__setattr__(self, "beta", 1.0 / self.lipschitz)
        # any step in (0, 1/L] keeps the guarantee
        if not 0 < self.beta <= 1.0 / self.lipschitz * (1 + 1e-12):
            raise ValueError(f"fixed predictive step must lie in (0, 1/L]; got {self.beta}")


@dataclass(frozen=True)
class BacktrackConfig:
    """Parameters of the backtracking predictive search.

    ``time_lipschitz`` optionally supplies a local bound ``Delta_t(x)``; when
    set, the ``2 Delta`` term is replaced by ``Delta_t(x_bar + s d) + Delta_t(x_bar)``.
    """

    epsilon: float
    Delta: float
    zeta: float = 0.5
    beta: float = 0.9
    max_exponent: int = 100
    time_lipschitz: Optional[Callable[[np.ndarray], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.Delta >= 0:
            raise ValueError("Delta must be nonnegative")
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("backtracking factor beta must lie in (0, 1)")
        if int(self.max_exponent) != self.max_exponent or self.max_exponent < 1:
            raise ValueError("max exponent M must be a positive integer")


@dataclass(frozen=True)
class GateVerdict:
    fired: bool
    reason: GateReason
    step: float
    candidate: np.ndarray
    direction: Optional[np.ndarray] = None
    exponent: Optional[int] = None
    evaluations: int = 0

    def __post_init__(self):
        if self.fired and not self.step > 0:
            raise ValueError("a fired gate must carry a positive step")


@dataclass(frozen=True)
class PredictiveCounter:
    """Number of rounds where the played decision moved at least ``delta`` from ``x_bar``."""

    delta: float
    count: int = 0
    rounds: int = 0

    @property
    def nu(self) -> float:
        return self.count / self.rounds if self.rounds else 0.0


def predictive_candidate(x_bar, g: ForecastGradient, step: float, set: BoxSet):
    """``(x_plus, d)`` with ``x_plus = P(x_bar - step g)`` and ``d = x_plus - x_bar``."""
    if not step > 0:
        raise ValueError("predictive step must be positive")
    x_bar = set.check(x_bar)
    x_plus = set.project(x_bar - step * set.check(g.estimate))
    return x_plus, x_plus - x_bar


def fixed_step_threshold(cfg: FixedStepGateConfig) -> float:
    a = cfg.epsilon / cfg.lipschitz
    return a + math.sqrt(a * a + 2.0 * cfg.delta / cfg.lipschitz)


def fixed_step_gate(x_bar, g: ForecastGradient, cfg: FixedStepGateConfig, set: BoxSet) -> GateVerdict:
    x_bar = set.check(x_bar)
    if not descent_check(g):
        return GateVerdict(False, "norm-gate-failed", 0.0, x_bar)
    x_plus, d = predictive_candidate(x_bar, g, cfg.beta, set)
    if np.linalg.norm(d) >= fixed_step_threshold(cfg):
        return GateVerdict(True, "fired", cfg.beta, x_plus, d)
    return GateVerdict(False, "direction-too-short", 0.0, x_bar, d)


def online_armijo_rhs(f_bar: float, g, d, epsilon: float, step: float, slack: float) -> float:
    """Right-hand side of the online Armijo test: ``f(x_bar) + s (g.d - eps|d|) - slack``."""
    return f_bar + step * (float(np.dot(g, d)) - epsilon * float(np.linalg.norm(d))) - slack


def online_armijo_holds(f_bar: float, f_trial: float, g, d, epsilon: float, step: float, slack: float) -> bool:
    """The online Armijo test written as ``f(x_bar) - f(trial) >= s (eps|d| - g.d) + slack``.

    Same inequality as comparing against :func:`online_armijo_rhs`, but adding
    the tiny step term to ``f(x_bar)`` can round it away, which would accept a
    trial that has not moved. The difference form keeps the required decrease
    strictly positive.
    """
    decrease = step * (epsilon * float(np.linalg.norm(d)) - float(np.dot(g, d)))
    return f_bar - f_trial >= decrease + slack


def backtracking_search(f_t: LossRound, x_bar, g: ForecastGradient, cfg: BacktrackConfig,
                        set: BoxSet) -> GateVerdict:
    """Backtracking on the revealed loss ``f_t``; every quantity is known at decision time.

    Tries ``beta**m`` for ``m = 0..M`` and fires on the first step satisfying
    the online Armijo condition; otherwise the step is 0.
    """
    x_bar = set.check(x_bar)
    if not descent_check(g):
        return GateVerdict(False, "norm-gate-failed", 0.0, x_bar)
    _, d = predictive_candidate(x_bar, g, cfg.zeta, set)
    if not np.any(d):
        return GateVerdict(False, "direction-too-short", 0.0, x_bar, d)

    f_bar = f_t(x_bar)
    local = cfg.time_lipschitz
    local_bar = local(x_bar) if local is not None else None
    lo, hi = set.lower, set.upper
    step = 1.0
    for m in range(cfg.max_exponent + 1):
        # same as pocob_update; the endpoint x_bar + d is feasible by construction
        trial = np.clip(x_bar + step * d, lo, hi)
        slack = 2.0 * cfg.Delta if local is None else local(trial) + local_bar
        if online_armijo_holds(f_bar, f_t(trial), g.estimate, d, g.epsilon, step, slack):
            return GateVerdict(True, "fired", step, trial, d, m, m + 1)
        step *= cfg.beta
    return GateVerdict(False, "armijo-exhausted", 0.0, x_bar, d, None, cfg.max_exponent + 1)


def pocob_update(x_bar, d, step: float, set: Optional[BoxSet] = None, tol: float = 1e-12) -> np.ndarray:
    """``x_bar + step d``; feasible when ``x_bar + d`` is, for ``step`` in (0, 1]."""
    x_bar, d = np.asarray(x_bar, dtype=float), np.asarray(d, dtype=float)
    if not 0 < step <= 1:
        raise ValueError("backtracking step must lie in (0, 1]")
    if set is not None and not set.contains(x_bar + d, tol=tol):
        raise ValueError("direction endpoint x_bar + d is infeasible")
    x = x_bar + step * d
    # x_bar + d is feasible, so only rounding can leave the box
    return np.clip(x, set.lower, set.upper) if set is not None else x


def update_counter(counter: PredictiveCounter, x_final, x_bar) -> PredictiveCounter:
    moved = np.linalg.norm(np.asarray(x_final, dtype=float) - np.asarray(x_bar, dtype=float))
    return PredictiveCounter(
        delta=counter.delta,
        count=counter.count + int(moved >= counter.delta),
        rounds=counter.rounds + 1,
    )


def feasible_descent_inequality_check(g, d, step: float, x_bar=None, rtol: float = 1e-12) -> bool:
    """Whether ``g.d <= -(1/step) ||d||^2`` holds for a projected direction ``d``.

    Unclipped coordinates meet the inequality with equality, so rounding is
    allowed for: ``rtol`` relative to the terms, plus, when ``x_bar`` is
    given, the cancellation error of forming ``d = P(x_bar - step g) - x_bar``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    g, d = np.asarray(g, dtype=float), np.asarray(d, dtype=float)
    lhs, rhs = float(np.dot(g, d)), -float(np.dot(d, d)) / step
    ng, nd = float(np.linalg.norm(g)), float(np.linalg.norm(d))
    allow = rtol * (ng * nd + abs(rhs))
    if x_bar is not None:
        u = np.finfo(float).eps
        r = 2 * math.sqrt(d.size) * u * (float(np.linalg.norm(x_bar)) + step * ng)
        allow += ng * r + (2 * nd * r + r * r) / step
    return lhs <= rhs + allow


def estimate_time_lipschitz(losses: Sequence[LossRound], probes: np.ndarray, window: int = 10) -> float:
    """Largest ``|f_t(x) - f_{t-1}(x)|`` over the last ``window`` pairs of rounds at probe points.

    A heuristic: nothing guarantees the bound holds off the probes or in the future.
    """
    recent = list(losses)[-(window + 1):]
    best = 0.0
    for prev, cur in zip(recent, recent[1:]):
        for x in np.atleast_2d(probes):
            best = max(best, abs(cur(x) - prev(x)))
    return best


def time_lipschitz_from_bound(bound: float) -> float:
    """Worst-case ``Delta = 2B`` for a B-bounded loss and a one-round gap."""
    return 2.0 * bound
