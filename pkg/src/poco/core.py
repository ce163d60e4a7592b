"""Decision sets, Euclidean projection and the per-round loss contract."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np


class DimensionError(ValueError):
    """Raised when a vector does not match the dimension of the decision set."""


class ConvexSet(Protocol):
    """Anything with a Euclidean projection can serve as a decision set."""

    dimension: int

    def project(self, point: np.ndarray) -> np.ndarray: ...

    def contains(self, point: np.ndarray, tol: float = 0.0) -> bool: ...


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BoxSet:
    """Axis-aligned box ``lower <= x <= upper``.

    Degenerate coordinates (``lower[i] == upper[i]``) are allowed and are
    pinned by the projection.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower, upper = _frozen(self.lower), _frozen(self.upper)
        if lower.shape != upper.shape:
            raise DimensionError(f"bounds differ in length: {lower.size} vs {upper.size}")
        if lower.size == 0:
            raise ValueError("box must have at least one coordinate")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def cube(cls, n: int, lo: float, hi: float) -> "BoxSet":
        return cls(np.full(n, lo), np.full(n, hi))

    @property
    def dimension(self) -> int:
        return self.lower.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def radius(self) -> float:
        """Largest Euclidean norm of a feasible point (the bound ``X``)."""
        return float(np.linalg.norm(np.maximum(np.abs(self.lower), np.abs(self.upper))))

    def check(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        if p.ndim != 1 or p.size != self.dimension:
            raise DimensionError(f"expected a vector of length {self.dimension}, got shape {p.shape}")
        return p

    def project(self, point) -> np.ndarray:
        return np.clip(self.check(point), self.lower, self.upper)

    def contains(self, point, tol: float = 0.0) -> bool:
        p = self.check(point)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        shape = (self.dimension,) if size is None else (size, self.dimension)
        return rng.uniform(self.lower, self.upper, size=shape)


def project(set: ConvexSet, point) -> np.ndarray:
    """Euclidean projection of ``point`` onto ``set``."""
    return set.project(point)


def diameter(set: BoxSet) -> float:
    return set.diameter


@dataclass(frozen=True)
class LossRound:
    """One round's loss ``f_t`` with its exact gradient.

    ``bound``, ``grad_bound`` and ``lipschitz`` are optional hints (B, G, L).
    ``minimizer`` optionally returns the exact argmin over a box; the regret
    oracle uses it when present.
    """

    t: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    bound: Optional[float] = None
    grad_bound: Optional[float] = None
    lipschitz: Optional[float] = None
    minimizer: Optional[Callable[[BoxSet], np.ndarray]] = field(default=None, compare=False)

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.gradient(np.asarray(x, dtype=float)), dtype=float)


def finite_difference_gradient(loss, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of ``loss`` at ``x``; a test oracle."""
    if step <= 0:
        raise ValueError("finite-difference step must be positive")
    f = loss if not isinstance(loss, LossRound) else loss.__call__
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (f(x + e) - f(x - e)) / (2 * step)
    return out
