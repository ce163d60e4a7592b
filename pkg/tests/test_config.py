from pathlib import Path

import pytest

from poco.config import CURTAILMENT, DEFAULTS, REGULATION, SYNTHETIC, ConfigError, evaluate, from_mapping, load_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_evaluate_expressions():
    assert evaluate("1/L", L=4.0) == 0.25
    assert evaluate("1/(10*sqrt(T))", T=100.0) == pytest.approx(0.01)
    assert evaluate(0.5) == 0.5 and evaluate("1e-6") == 1e-6
    assert evaluate("-2*N + 1", N=3.0) == -5.0
    for bad in ("__import__('os')", "L.real", "foo", "1/"):
        with pytest.raises(ConfigError):
            evaluate(bad, L=1.0)


@pytest.mark.parametrize("name, default", [("regulation", REGULATION), ("curtailment", CURTAILMENT),
                                           ("synthetic", SYNTHETIC)])
def test_shipped_configs_match_defaults(name, default):
    assert load_config(CONFIGS / f"{name}.yaml") == default


def test_aliases_and_nesting():
    cfg = from_mapping({"gate": {"trial_step": 0.25, "max_exponent": 7}, "epsilon": 0.2}, "curtailment")
    assert (cfg.zeta, cfg.M, cfg.epsilons) == (0.25, 7, (0.2,))
    assert cfg.alpha == CURTAILMENT.alpha


@pytest.mark.parametrize("data", [
    {"unknown_key": 1},
    {"zeta": 0.5, "trial_step": 0.5},
    {"epsilon": []},
    {"epsilon": [-0.1]},
    {"T": 0},
    {"T": 10.5},
    {"sigma": 0.0},
    {"alpha": 0.5},
    {"noise": "laplace"},
    {"beta": "1/"},
    {"Delta": -1.0},
    {"scenario": "storage"},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        from_mapping(data)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("T: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    lst = tmp_path / "list.yaml"
    lst.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(lst)
    other = tmp_path / "other.yaml"
    other.write_text("scenario: curtailment\n")
    with pytest.raises(ConfigError):
        load_config(other, "regulation")


def test_defaults_cover_all_scenarios():
    assert set(DEFAULTS) == {"regulation", "curtailment", "synthetic-quadratic"}
    assert REGULATION.resolve("beta", 50.01) == pytest.approx(1 / 50.01)
