"""Dynamic regret bookkeeping and closed-form regret bounds."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from poco.core import BoxSet, LossRound

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoundOptimum:
    minimizer: np.ndarray
    value: float
    residual: float
    converged: bool = True
    iterations: int = 0


def fixed_point_residual(f_t: LossRound, x: np.ndarray, set: BoxSet, L: float) -> float:
    """``||x - P(x - grad f(x) / L)||``; zero exactly at a minimizer."""
    return float(np.linalg.norm(x - set.project(x - f_t.grad(x) / L)))


def _lipschitz_hint(f_t: LossRound, set: BoxSet) -> Optional[float]:
    return f_t.lipschitz if f_t.lipschitz and f_t.lipschitz > 0 else None


def round_optimum(f_t: LossRound, set: BoxSet, tol: float = 1e-9, max_iters: int = 100_000,
                  use_exact: bool = True, x0=None) -> RoundOptimum:
    """Minimize one round's loss over the box.

    Uses ``f_t.minimizer`` when available and ``use_exact`` is set. Otherwise
    runs accelerated projected gradient (step 1/L, or backtracking on L when
    no hint exists) with adaptive restart, stopping once the projected
    gradient fixed-point residual drops to ``tol``. Hitting ``max_iters`` is
    flagged through ``converged=False`` and returns the best iterate.
    """
    L = _lipschitz_hint(f_t, set)
    if use_exact and f_t.minimizer is not None:
        x = set.project(f_t.minimizer(set))
        res = fixed_point_residual(f_t, x, set, L or 1.0)
        return RoundOptimum(x, f_t(x), res, res <= tol, 0)

    backtrack = L is None
    L = L or 1.0
    x = set.project(np.zeros(set.dimension) if x0 is None else x0)
    y, theta = x.copy(), 1.0
    best_x, best_res = x, math.inf
    for k in range(1, max_iters + 1):
        gy = f_t.grad(y)
        if backtrack:
            fy = f_t(y)
            while True:
                x_new = set.project(y - gy / L)
                step = x_new - y
                if f_t(x_new) <= fy + gy @ step + 0.5 * L * (step @ step) + 1e-15 * abs(fy):
                    break
                L *= 2.0
        else:
            x_new = set.project(y - gy / L)
        res = fixed_point_residual(f_t, x_new, set, L)
        if res < best_res:
            best_x, best_res = x_new, res
        if res <= tol:
            return RoundOptimum(x_new, f_t(x_new), res, True, k)
        theta_new = 0.5 * (1 + math.sqrt(1 + 4 * theta * theta))
        if (y - x_new) @ (x_new - x) > 0:
            # momentum points uphill: restart
            theta_new, y = 1.0, x_new.copy()
        else:
            y = x_new + ((theta - 1) / theta_new) * (x_new - x)
        x, theta = x_new, theta_new
    log.warning("round %d optimum did not converge: residual %.3g after %d iterations",
                f_t.t, best_res, max_iters)
    return RoundOptimum(best_x, f_t(best_x), best_res, False, max_iters)


@dataclass
class RegretLedger:
    """Per-algorithm cumulative dynamic regret and optimizer path variation."""

    cumulative: Dict[str, float] = field(default_factory=dict)
    increments: Dict[str, List[float]] = field(default_factory=dict)
    path_variation: Dict[str, float] = field(default_factory=dict)
    previous_optimum: Dict[str, np.ndarray] = field(default_factory=dict)

    def register(self, name: str):
        if name not in self.cumulative:
            self.cumulative[name] = 0.0
            self.increments[name] = []
            self.path_variation[name] = 0.0

    def regret(self, name: str) -> float:
        return self.cumulative[name]


def accumulate(ledger: RegretLedger, name: str, f_t: LossRound, played, optimum: RoundOptimum) -> RegretLedger:
    """Add ``f_t(played) - f_t(x*_t)`` to ``name`` and extend its path variation."""
    ledger.register(name)
    inc = f_t(played) - optimum.value
    ledger.increments[name].append(inc)
    ledger.cumulative[name] += inc
    prev = ledger.previous_optimum.get(name)
    if prev is not None:
        ledger.path_variation[name] += float(np.linalg.norm(optimum.minimizer - prev))
    ledger.previous_optimum[name] = np.array(optimum.minimizer, copy=True)
    return ledger


def ogd_bound(X: float, G: float, V_T: float, T: int) -> float:
    """Dynamic regret bound of OGD with step ``1/sqrt(T)``: ``(7X^2/4 + G^2/2 + X V_T) sqrt(T)``."""
    return (7 * X**2 / 4 + G**2 / 2 + X * V_T) * math.sqrt(T)


def pogd_bound(X: float, G: float, V_T: float, delta: float, T: int) -> float:
    """Predictive OGD bound when more than ``1/sqrt(T)`` of the rounds fire."""
    return (7 * X**2 / 4 + G**2 / 2 + X * V_T - delta) * math.sqrt(T)


def poco_bound(oco_bound: float, T: int, nu: float, delta: float) -> float:
    return oco_bound - T * nu * delta


def pocob_bound(oco_bound: float, T: int, nu: float, Delta: float) -> float:
    return oco_bound - 2 * T * nu * Delta


def strongly_convex_bound(V_T: float, constant: float = 1.0) -> float:
    """``C (V_T + 1)``; the constant of the sigma-OGD bound is user supplied."""
    return constant * (V_T + 1.0)
