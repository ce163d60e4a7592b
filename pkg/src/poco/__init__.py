"""Predictive online convex optimization with gated forecast steps."""

from poco.core import BoxSet, LossRound, diameter, finite_difference_gradient, project
from poco.forecaster import ForecastGradient, Forecaster, NoiseSpec, descent_check, forecast
from poco.oco import OgdParams, OmdState, SigmaOgdParams, ogd_step, omd_step, sigma_ogd_step
from poco.predictive import (
    BacktrackConfig,
    FixedStepGateConfig,
    GateVerdict,
    PredictiveCounter,
    backtracking_search,
    feasible_descent_inequality_check,
    fixed_step_gate,
    fixed_step_threshold,
    online_armijo_holds,
    pocob_update,
    predictive_candidate,
    update_counter,
)
from poco.regret import (
    RegretLedger,
    RoundOptimum,
    accumulate,
    pocob_bound,
    poco_bound,
    pogd_bound,
    round_optimum,
)

__all__ = [
    "BoxSet",
    "LossRound",
    "diameter",
    "finite_difference_gradient",
    "project",
    "ForecastGradient",
    "Forecaster",
    "NoiseSpec",
    "descent_check",
    "forecast",
    "OgdParams",
    "OmdState",
    "SigmaOgdParams",
    "ogd_step",
    "omd_step",
    "sigma_ogd_step",
    "BacktrackConfig",
    "FixedStepGateConfig",
    "GateVerdict",
    "PredictiveCounter",
    "backtracking_search",
    "feasible_descent_inequality_check",
    "fixed_step_gate",
    "fixed_step_threshold",
    "online_armijo_holds",
    "pocob_update",
    "predictive_candidate",
    "update_counter",
    "RegretLedger",
    "RoundOptimum",
    "accumulate",
    "pocob_bound",
    "poco_bound",
    "pogd_bound",
    "round_optimum",
]
