"""Experiment configuration: defaults for each scenario and YAML loading.

Each parameter can be written under its usual symbol or a spelled-out alias,
e.g. ``zeta`` or ``trial_step``. Step-size fields also accept small
expressions in ``L``, ``T`` and ``N`` such as ``1/L`` or ``1/(10*sqrt(T))``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from poco.forecaster import NOISE_MODES

SCENARIOS = ("regulation", "curtailment", "synthetic-quadratic")

Expr = Union[float, str]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def evaluate(expr: Expr, **names: float) -> float:
    """Evaluate a number or an arithmetic expression over ``names`` and ``sqrt``."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    try:
        return float(expr)
    except (TypeError, ValueError):
        pass

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return float(names[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -walk(node.operand)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1):
            return math.sqrt(walk(node.args[0]))
        raise ConfigError(f"unsupported expression {expr!r}")

    try:
        tree = ast.parse(str(expr), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse {expr!r}") from exc
    return walk(tree)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "regulation"
    T: int = 1000
    seed: int = 0
    epsilons: Tuple[float, ...] = (0.1, 0.05, 0.01)
    noise_mode: str = "fixed-radius-sphere"
    # fleet
    N: int = 25
    h: float = 30.0
    power_range_kw: Tuple[float, float] = (1.0, 3.0)
    capacity_range_kwh: Tuple[float, float] = (10.0, 15.0)
    alpha: float = 1.0
    sigma: float = 0.005
    # signal noise variances
    signal_noise_var: float = 0.01
    plateau_noise_var: float = 0.001
    # OCO steppers
    eta: Expr = 1.0
    gamma: Expr = "L"
    omd_eta: Optional[Expr] = None
    # predictive gates
    delta: float = 1e-6
    beta: Expr = "1/L"
    Delta: Expr = 0.0
    zeta: float = 0.5
    M: int = 100
    bound_constant: float = 1.0
    include_omd: bool = True
    check_guarantees: bool = True
    out: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "power_range_kw", tuple(float(v) for v in self.power_range_kw))
        object.__setattr__(self, "capacity_range_kwh", tuple(float(v) for v in self.capacity_range_kwh))
        for name in ("h", "alpha", "sigma", "signal_noise_var", "plateau_noise_var", "delta", "zeta",
                     "bound_constant"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("T", "seed", "N", "M"):
            v = getattr(self, name)
            if isinstance(v, bool) or float(v) != int(float(v)):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(float(v)))
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if not self.epsilons:
            raise ConfigError("at least one epsilon is required")
        if any(not e > 0 for e in self.epsilons):
            raise ConfigError("every epsilon must be positive")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"noise mode must be one of {NOISE_MODES}")
        if self.N < 1:
            raise ConfigError("N must be positive")
        lo, hi = self.power_range_kw
        if not 0 <= lo <= hi:
            raise ConfigError("power range must satisfy 0 <= low <= high")
        lo, hi = self.capacity_range_kwh
        if not 0 < lo <= hi:
            raise ConfigError("capacity range must satisfy 0 < low <= high")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if self.alpha < 1:
            raise ConfigError("alpha must be at least 1")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.zeta > 0:
            raise ConfigError("zeta must be positive")
        if self.M < 1:
            raise ConfigError("M must be at least 1")
        if self.signal_noise_var < 0 or self.plateau_noise_var < 0:
            raise ConfigError("noise variances must be nonnegative")
        # step expressions must evaluate with representative values
        names = dict(L=1.0, T=float(self.T), N=float(self.N))
        for name in ("eta", "gamma", "beta", "Delta") + (("omd_eta",) if self.omd_eta is not None else ()):
            v = evaluate(getattr(self, name), **names)
            if name == "Delta":
                if v < 0:
                    raise ConfigError("Delta must be nonnegative")
            elif not v > 0:
                raise ConfigError(f"{name} must be positive")

    def resolve(self, name: str, L: float) -> float:
        return evaluate(getattr(self, name), L=L, T=float(self.T), N=float(self.N))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


REGULATION = ExperimentConfig()

CURTAILMENT = ExperimentConfig(
    scenario="curtailment",
    epsilons=(0.1, 0.01, 0.001),
    alpha=1.001,
    sigma=5e-5,
    eta="1/(10*sqrt(T))",
    beta=0.9,
    zeta=0.5,
    M=100,
    Delta=1e-6,
)

SYNTHETIC = ExperimentConfig(
    scenario="synthetic-quadratic",
    N=5,
    epsilons=(0.1, 0.01),
    eta="1/sqrt(T)",
    gamma="L",
    beta="1/L",
    Delta=1e-3,
    zeta=0.5,
)

DEFAULTS = {"regulation": REGULATION, "curtailment": CURTAILMENT, "synthetic-quadratic": SYNTHETIC}

# symbol -> spelled-out aliases accepted in config files
ALIASES = {
    "T": ("rounds", "horizon"),
    "seed": (),
    "epsilons": ("epsilon", "forecast_error"),
    "noise_mode": ("noise",),
    "N": ("n_loads",),
    "h": ("step_seconds",),
    "power_range_kw": ("x_bar_over_h", "power_range"),
    "capacity_range_kwh": ("c", "capacity_range"),
    "alpha": ("recovery_coefficient",),
    "sigma": ("soc_weight",),
    "signal_noise_var": ("w_var", "noise_var"),
    "plateau_noise_var": ("w_prime_var",),
    "eta": ("step_size", "ogd_step"),
    "gamma": ("sigma_ogd_gamma",),
    "omd_eta": ("omd_step",),
    "delta": ("improvement_threshold",),
    "beta": ("predictive_step", "backtracking_factor"),
    "Delta": ("time_lipschitz",),
    "zeta": ("trial_step",),
    "M": ("max_exponent",),
    "bound_constant": (),
    "include_omd": (),
    "check_guarantees": (),
    "out": ("output",),
    "scenario": (),
}
_LOOKUP = {alias: key for key, als in ALIASES.items() for alias in (key,) + als}


def _flatten(data: Dict[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for k, v in data.items():
        if isinstance(v, dict):
            flat.update(_flatten(v))
        else:
            flat[k] = v
    return flat


def from_mapping(data: Dict[str, Any], scenario: Optional[str] = None) -> ExperimentConfig:
    """Build a config from a (possibly nested) mapping; nesting is organizational only."""
    flat = _flatten(data or {})
    scenario = scenario or flat.get("scenario") or "regulation"
    if scenario not in DEFAULTS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    updates: Dict[str, Any] = {}
    for k, v in flat.items():
        if k not in _LOOKUP:
            raise ConfigError(f"unknown configuration key {k!r}")
        key = _LOOKUP[k]
        if key in updates:
            raise ConfigError(f"{key!r} given more than once")
        if key == "epsilons" and not isinstance(v, (list, tuple)):
            v = [v]
        if key in ("epsilons", "power_range_kw", "capacity_range_kwh"):
            v = tuple(float(x) for x in v)
        updates[key] = v
    updates["scenario"] = scenario
    names = {f.name for f in fields(ExperimentConfig)}
    assert set(updates) <= names
    return replace(DEFAULTS[scenario], **updates)


def load_config(path: Union[str, Path], scenario: Optional[str] = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping at top level")
    file_scenario = (data or {}).get("scenario")
    if scenario and file_scenario and file_scenario != scenario:
        raise ConfigError(f"{path} is for scenario {file_scenario!r}, not {scenario!r}")
    return from_mapping(data or {}, scenario)
