"""Round loop for the demand-response and synthetic studies, CSV traces and summaries.

Every algorithm in a run sees the same signal sequence, and every
forecast-driven algorithm draws the same forecaster noise stream, so the
comparison is paired. Each algorithm carries its own fleet state, since the
state of charge depends on its own past decisions.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from poco.config import ExperimentConfig
from poco.core import BoxSet, LossRound
from poco.demand_response import (
    Fleet,
    FleetParams,
    SignalModel,
    advance_state,
    curtailment_loss,
    generate_signal,
    regulation_loss,
    sample_fleet,
)
from poco.forecaster import Forecaster, NoiseSpec
from poco.oco import OgdParams, OmdState, SigmaOgdParams, ogd_step, omd_step, sigma_ogd_step
from poco.predictive import (
    BacktrackConfig,
    FixedStepGateConfig,
    GateVerdict,
    PredictiveCounter,
    backtracking_search,
    fixed_step_gate,
    online_armijo_holds,
    update_counter,
)
from poco.regret import (
    RegretLedger,
    accumulate,
    ogd_bound,
    poco_bound,
    pocob_bound,
    pogd_bound,
    round_optimum,
    strongly_convex_bound,
)

log = logging.getLogger(__name__)


class GuaranteeViolation(AssertionError):
    """A fired predictive step broke the improvement it is supposed to guarantee."""


# ---------------------------------------------------------------- environments

class Environment:
    """Produces each round's loss for a given algorithm state."""

    kind = "synthetic"

    def __init__(self, cfg: ExperimentConfig, signal_seed: int, fleet_seed: int):
        self.cfg = cfg

    def initial_state(self):
        return None

    def box(self, state) -> BoxSet:
        raise NotImplementedError

    def signal(self, t: int) -> float:
        raise NotImplementedError

    def loss(self, state, t: int) -> LossRound:
        raise NotImplementedError

    def advance(self, state, x):
        return state

    def lipschitz(self) -> Optional[float]:
        return None


class DemandResponse(Environment):
    def __init__(self, cfg: ExperimentConfig, signal_seed: int, fleet_seed: int):
        super().__init__(cfg, signal_seed, fleet_seed)
        self.kind = cfg.scenario
        params = FleetParams(cfg.N, cfg.h, cfg.power_range_kw, cfg.capacity_range_kwh, cfg.alpha)
        self.fleet0 = sample_fleet(params, fleet_seed)
        self.model = SignalModel(cfg.scenario, cfg.T, signal_seed, noise_var=cfg.signal_noise_var,
                                 plateau_noise_var=cfg.plateau_noise_var)
        self.signals = np.array([generate_signal(self.model, t) for t in range(1, cfg.T + 1)])
        self._box = self.fleet0.box

    def initial_state(self) -> Fleet:
        return self.fleet0

    def box(self, state=None) -> BoxSet:
        return self._box

    def signal(self, t: int) -> float:
        return float(self.signals[t - 1])

    def loss(self, state: Fleet, t: int) -> LossRound:
        make = regulation_loss if self.kind == "regulation" else curtailment_loss
        return make(state, self.signal(t), self.cfg.sigma, t)

    def advance(self, state: Fleet, x) -> Fleet:
        return advance_state(state, x, self.kind)

    def lipschitz(self) -> Optional[float]:
        if self.kind == "regulation":
            return 2.0 * self.cfg.N + 2.0 * self.cfg.sigma
        return None


class SyntheticQuadratic(Environment):
    """``f_t(x) = ||x - theta_t||^2`` on ``[-1, 1]^N`` with a drifting, noisy target."""

    def __init__(self, cfg: ExperimentConfig, signal_seed: int, fleet_seed: int):
        super().__init__(cfg, signal_seed, fleet_seed)
        rng = np.random.default_rng(signal_seed)
        phase = np.random.default_rng(fleet_seed).uniform(0, 2 * np.pi, cfg.N)
        t = np.arange(1, cfg.T + 1)[:, None]
        self.targets = 0.8 * np.sin(2 * np.pi * t / cfg.T + phase) + np.sqrt(cfg.signal_noise_var) * \
            rng.standard_normal((cfg.T, cfg.N))
        self._box = BoxSet.cube(cfg.N, -1.0, 1.0)

    def box(self, state=None) -> BoxSet:
        return self._box

    def signal(self, t: int) -> float:
        return float(np.linalg.norm(self.targets[t - 1]))

    def loss(self, state, t: int) -> LossRound:
        theta = self.targets[t - 1]

        def value(x):
            d = x - theta
            return float(d @ d)

        return LossRound(t, value, lambda x: 2.0 * (x - theta), lipschitz=2.0,
                         minimizer=lambda box: box.project(theta))

    def lipschitz(self) -> float:
        return 2.0


def make_environment(cfg: ExperimentConfig, signal_seed: int, fleet_seed: int) -> Environment:
    if cfg.scenario == "synthetic-quadratic":
        return SyntheticQuadratic(cfg, signal_seed, fleet_seed)
    return DemandResponse(cfg, signal_seed, fleet_seed)


# ---------------------------------------------------------------- algorithms

@dataclass
class GuaranteeRecord:
    """Post-hoc check of one fired predictive step, filled once the next loss is revealed."""

    t: int  # round in which the predictive decision is played
    kind: str  # "fixed" or "backtracking"
    improvement: float  # f_t(x_bar_t) - f_t(x_t) on the revealed loss
    required: float
    holds: bool
    # backtracking only
    online_armijo: Optional[bool] = None
    previous_improvement: Optional[float] = None
    delta_valid: Optional[bool] = None
    armijo: Optional[bool] = None


@dataclass
class Algorithm:
    name: str
    kind: str  # "baseline", "fixed", "backtracking", "omd"
    epsilon: Optional[float]
    step: Callable  # (x, grad, box) -> x_bar
    x: np.ndarray
    state: object
    forecaster: Optional[Forecaster] = None
    gate_cfg: object = None
    omd: Optional[OmdState] = None
    counter: Optional[PredictiveCounter] = None
    x_bar: Optional[np.ndarray] = None  # OCO proposal behind the current decision
    reason: str = "none"
    pending: Optional[dict] = None
    shadow_regret: float = 0.0
    fired: int = 0
    records: List[GuaranteeRecord] = field(default_factory=list)

    @property
    def predictive(self) -> bool:
        return self.kind in ("fixed", "backtracking")


@dataclass(frozen=True)
class AlgorithmRound:
    loss: float
    regret: float
    v_t: float
    gate_reason: str = "none"
    c_t: int = 0
    nu: float = 0.0
    improvement: float = 0.0


@dataclass(frozen=True)
class RoundTrace:
    t: int
    signal: float
    rows: Dict[str, AlgorithmRound]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    algorithms: List[str]
    predictive: List[str]
    traces: List[RoundTrace]
    ledger: RegretLedger
    records: Dict[str, List[GuaranteeRecord]]
    counters: Dict[str, PredictiveCounter]
    shadow_regret: Dict[str, float]
    summary: dict
    baseline: str


def _label(eps: float) -> str:
    return f"{eps:g}"


def _baseline_step(cfg: ExperimentConfig, env: Environment):
    L = env.lipschitz()
    if cfg.scenario == "regulation":
        params = SigmaOgdParams(eta=cfg.resolve("eta", L), gamma=cfg.resolve("gamma", L), sigma=cfg.sigma)
        return "sigma_ogd", lambda x, g, box: sigma_ogd_step(x, g, params, box), params.eta / params.gamma
    eta = cfg.resolve("eta", L if L else 1.0)
    params = OgdParams(eta)
    return "ogd", lambda x, g, box: ogd_step(x, g, params, box), eta


def build_algorithms(cfg: ExperimentConfig, env: Environment, forecast_seed: int) -> List[Algorithm]:
    box = env.box(env.initial_state())
    x0 = box.project(np.zeros(box.dimension))
    base_name, step, effective = _baseline_step(cfg, env)
    L = env.lipschitz()
    algs = [Algorithm(base_name, "baseline", None, step, x0.copy(), env.initial_state())]
    omd_eta = cfg.resolve("omd_eta", L or 1.0) if cfg.omd_eta is not None else effective
    noise = NoiseSpec(cfg.noise_mode, forecast_seed)

    kinds = []
    if L is not None:
        kinds.append("fixed")
    if cfg.scenario != "regulation":
        kinds.append("backtracking")
    for eps in cfg.epsilons:
        for kind in kinds:
            if kind == "fixed":
                gate = FixedStepGateConfig(eps, cfg.delta, L, cfg.resolve("beta", L))
                name = f"poco_eps{_label(eps)}"
            else:
                gate = BacktrackConfig(eps, cfg.resolve("Delta", L or 1.0), cfg.zeta,
                                       cfg.resolve("beta", L or 1.0), cfg.M)
                name = f"pocob_eps{_label(eps)}"
            algs.append(Algorithm(name, kind, eps, step, x0.copy(), env.initial_state(),
                                  forecaster=Forecaster(eps, noise), gate_cfg=gate,
                                  counter=PredictiveCounter(cfg.delta)))
        if cfg.include_omd:
            algs.append(Algorithm(f"omd_eps{_label(eps)}", "omd", eps, step, x0.copy(), env.initial_state(),
                                  forecaster=Forecaster(eps, noise), omd=OmdState(x0.copy(), omd_eta)))
    return algs


# ---------------------------------------------------------------- round loop

def _settle(alg: Algorithm, f_t: LossRound, t: int, Delta: float) -> float:
    """Check the guarantee of the predictive step that produced ``x_t`` against the revealed ``f_t``."""
    if alg.pending is None:
        return 0.0
    p, alg.pending = alg.pending, None
    x, x_bar = p["x"], p["x_bar"]
    improvement = f_t(x_bar) - f_t(x)
    if alg.kind == "fixed":
        required = alg.gate_cfg.delta
        rec = GuaranteeRecord(t, "fixed", improvement, required, improvement >= required)
    else:
        f_prev: LossRound = p["f_prev"]
        v: GateVerdict = p["verdict"]
        g = p["g"]
        online = online_armijo_holds(f_prev(x_bar), f_prev(x), g.estimate, v.direction, g.epsilon,
                                     v.step, 2 * Delta)
        prev_impr = f_prev(x_bar) - f_prev(x)
        valid = all(abs(f_prev(y) - f_t(y)) <= Delta for y in (x_bar, x))
        armijo = f_t(x) <= f_t(x_bar) + v.step * float(f_t.grad(x_bar) @ v.direction)
        rec = GuaranteeRecord(t, "backtracking", improvement, 2 * Delta, prev_impr > 2 * Delta,
                              online, prev_impr, valid, armijo)
    alg.records.append(rec)
    return improvement


def _decide(alg: Algorithm, env: Environment, f_t: LossRound, t: int, box: BoxSet):
    """OCO step, then (when forecasting) the predictive step for round ``t + 1``."""
    x_t = alg.x
    grad = f_t.grad(x_t)
    if alg.kind == "omd":
        y_next = box.project(alg.omd.y - alg.omd.eta * grad)
        f_next = env.loss(alg.state, t + 1)
        hint = alg.forecaster(f_next.grad(y_next), at=y_next).estimate
        alg.x, alg.omd = omd_step(alg.omd, grad, hint, box)
        alg.x_bar = alg.x
        return
    x_bar = alg.step(x_t, grad, box)
    alg.x_bar = x_bar
    if not alg.predictive:
        alg.x = x_bar
        return
    f_next = env.loss(alg.state, t + 1)  # simulation side: the forecaster's target
    g = alg.forecaster(f_next.grad(x_bar), at=x_bar)
    if alg.kind == "fixed":
        v = fixed_step_gate(x_bar, g, alg.gate_cfg, box)
    else:
        v = backtracking_search(f_t, x_bar, g, alg.gate_cfg, box)
    alg.reason = v.reason
    alg.x = v.candidate if v.fired else x_bar
    alg.counter = update_counter(alg.counter, alg.x, x_bar)
    if v.fired:
        alg.fired += 1
        alg.pending = dict(x=alg.x, x_bar=x_bar, verdict=v, g=g, f_prev=f_t)


def run_experiment(cfg: ExperimentConfig, strict: Optional[bool] = None) -> ExperimentResult:
    """Run every algorithm of the scenario for ``cfg.T`` rounds.

    With ``strict`` (default ``cfg.check_guarantees``) a broken fixed-step or
    online-Armijo guarantee raises :class:`GuaranteeViolation`.
    """
    strict = cfg.check_guarantees if strict is None else strict
    fleet_ss, signal_ss, forecast_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    seed_of = lambda ss: int(ss.generate_state(1)[0])
    env = make_environment(cfg, seed_of(signal_ss), seed_of(fleet_ss))
    algs = build_algorithms(cfg, env, seed_of(forecast_ss))
    ledger = RegretLedger()
    Delta = cfg.resolve("Delta", env.lipschitz() or 1.0)
    traces: List[RoundTrace] = []
    grad_max = 0.0

    for t in range(1, cfg.T + 1):
        rows = {}
        for alg in algs:
            box = env.box(alg.state)
            f_t = env.loss(alg.state, t)
            opt = round_optimum(f_t, box)
            accumulate(ledger, alg.name, f_t, alg.x, opt)
            x_bar = alg.x if alg.x_bar is None else alg.x_bar
            alg.shadow_regret += f_t(x_bar) - opt.value
            improvement = _settle(alg, f_t, t, Delta)
            if strict and alg.records and alg.records[-1].t == t:
                _enforce(alg, alg.records[-1])
            grad_max = max(grad_max, float(np.linalg.norm(f_t.grad(alg.x))))
            c = alg.counter
            rows[alg.name] = AlgorithmRound(
                loss=f_t(alg.x),
                regret=ledger.cumulative[alg.name],
                v_t=ledger.path_variation[alg.name],
                gate_reason=alg.reason,
                c_t=c.count if c else 0,
                nu=(c.count / t) if c else 0.0,
                improvement=improvement,
            )
            alg.state = env.advance(alg.state, alg.x)
            if t < cfg.T:
                _decide(alg, env, f_t, t, box)
        traces.append(RoundTrace(t, env.signal(t), rows))

    result = ExperimentResult(
        config=cfg,
        algorithms=[a.name for a in algs],
        predictive=[a.name for a in algs if a.predictive],
        traces=traces,
        ledger=ledger,
        records={a.name: a.records for a in algs if a.predictive},
        counters={a.name: a.counter for a in algs if a.predictive},
        shadow_regret={a.name: a.shadow_regret for a in algs},
        summary={},
        baseline=algs[0].name,
    )
    result.summary = summarize(result, env, algs, Delta, grad_max)
    return result


def _enforce(alg: Algorithm, rec: GuaranteeRecord):
    if rec.kind == "fixed" and not rec.holds:
        raise GuaranteeViolation(
            f"{alg.name} round {rec.t}: fixed-step improvement {rec.improvement:.3g} < delta {rec.required:.3g}")
    if rec.kind == "backtracking" and not (rec.online_armijo and rec.holds):
        raise GuaranteeViolation(
            f"{alg.name} round {rec.t}: backtracking step improved the revealed loss by "
            f"{rec.previous_improvement:.3g}, not more than 2 Delta = {rec.required:.3g}")
    if rec.kind == "backtracking" and rec.delta_valid and not rec.armijo:
        raise GuaranteeViolation(f"{alg.name} round {rec.t}: modified Armijo condition failed with a valid Delta")


def summarize(result: ExperimentResult, env: Environment, algs: List[Algorithm], Delta: float,
              grad_max: float) -> dict:
    cfg = result.config
    T = cfg.T
    ledger = result.ledger
    base = result.baseline
    base_regret = ledger.cumulative[base]
    box = env.box(env.initial_state())
    X = box.radius
    out = {
        "scenario": cfg.scenario,
        "T": T,
        "seed": cfg.seed,
        "baseline": base,
        "X": X,
        "D": box.diameter,
        "G_observed": grad_max,
        "Delta": Delta if cfg.scenario != "regulation" else None,
        "algorithms": {},
    }
    for alg in algs:
        reg = ledger.cumulative[alg.name]
        entry = {
            "kind": alg.kind,
            "epsilon": alg.epsilon,
            "final_regret": reg,
            "V_T": ledger.path_variation[alg.name],
            "reduction_vs_baseline": (1 - reg / base_regret) if base_regret > 0 else None,
        }
        if alg.predictive:
            c = alg.counter
            nu = c.count / T
            entry.update(
                c_T=c.count,
                nu=nu,
                fired=alg.fired,
                shadow_baseline_regret=alg.shadow_regret,
                violations=sum(not _record_ok(r) for r in alg.records),
            )
            if alg.kind == "fixed":
                entry["poco_bound"] = poco_bound(base_regret, T, nu, cfg.delta)
                entry["poco_bound_shadow"] = poco_bound(alg.shadow_regret, T, nu, cfg.delta)
            else:
                entry["pocob_bound"] = pocob_bound(base_regret, T, nu, Delta)
                entry["pocob_bound_shadow"] = pocob_bound(alg.shadow_regret, T, nu, Delta)
        out["algorithms"][alg.name] = entry
    V_base = ledger.path_variation[base]
    if cfg.scenario == "regulation":
        out["sigma_ogd_bound"] = strongly_convex_bound(V_base, cfg.bound_constant)
    else:
        out["ogd_bound"] = ogd_bound(X, grad_max, V_base, T)
        out["pogd_bound"] = pogd_bound(X, grad_max, V_base, cfg.delta, T)
    return out


def _record_ok(r: GuaranteeRecord) -> bool:
    if r.kind == "fixed":
        return r.holds
    return bool(r.online_armijo and r.holds and (r.armijo or not r.delta_valid))


# ---------------------------------------------------------------- CSV output

def csv_columns(result_or_names, predictive=None) -> List[str]:
    if isinstance(result_or_names, ExperimentResult):
        names, predictive = result_or_names.algorithms, result_or_names.predictive
    else:
        names = result_or_names
    predictive = set(predictive or ())
    cols = ["t", "signal"]
    for n in names:
        cols += [f"{n}_loss", f"{n}_regret", f"{n}_v_t"]
        if n in predictive:
            cols += [f"{n}_gate_reason", f"{n}_c_t", f"{n}_nu", f"{n}_improvement"]
    return cols


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(traces: List[RoundTrace], names: List[str], predictive: List[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(names, predictive))
    pred = set(predictive)
    for tr in traces:
        row = [tr.t, _fmt(tr.signal)]
        for n in names:
            r = tr.rows[n]
            row += [_fmt(r.loss), _fmt(r.regret), _fmt(r.v_t)]
            if n in pred:
                row += [r.gate_reason, r.c_t, _fmt(r.nu), _fmt(r.improvement)]
        w.writerow(row)
    return buf.getvalue()


def emit_csv(traces: List[RoundTrace], path, names: Optional[List[str]] = None,
             predictive: Optional[List[str]] = None) -> Path:
    """Write the trace atomically; a failed write leaves no partial file behind."""
    if names is None:
        names = list(traces[0].rows) if traces else []
    text = render_csv(traces, names, predictive or [])
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path
