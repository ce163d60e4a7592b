import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poco.forecaster import NOISE_MODES, ForecastGradient, Forecaster, NoiseSpec, descent_check, forecast


def test_zero_mode_is_exact():
    g = forecast([1.0, -2.0], 0.3, NoiseSpec("zero"))
    np.testing.assert_array_equal(g.estimate, [1.0, -2.0])


def test_fixed_radius_sphere_has_exact_radius():
    g = forecast([1.0, 0.0], 0.1, NoiseSpec("fixed-radius-sphere", seed=3))
    assert np.linalg.norm(g.estimate - [1.0, 0.0]) == pytest.approx(0.1, rel=1e-12)


def test_uniform_ball_radial_law():
    # radius of a uniform draw in the N-ball of radius eps has mean eps N / (N + 1)
    n, eps = 4, 0.05
    f = Forecaster(eps, NoiseSpec("uniform-ball", seed=11))
    err = np.array([np.linalg.norm(f(np.zeros(n)).estimate) for _ in range(10_000)])
    assert err.max() <= eps
    assert err.mean() == pytest.approx(eps * n / (n + 1), rel=0.01)
    # P(r <= eps/2) = 2^-N
    assert np.mean(err <= eps / 2) == pytest.approx(0.5 ** n, abs=0.01)


@pytest.mark.parametrize("mode", NOISE_MODES)
def test_error_never_exceeds_epsilon(mode):
    f = Forecaster(1e-3, NoiseSpec(mode, seed=1))
    rng = np.random.default_rng(0)
    for _ in range(2000):
        grad = rng.normal(size=5) * 1e3
        assert np.linalg.norm(f(grad).estimate - grad) <= 1e-3


@pytest.mark.parametrize("norm, eps, expected", [(2.0, 0.1, True), (0.1, 0.1, False), (0.0, 0.5, False)])
def test_descent_check_examples(norm, eps, expected):
    g = ForecastGradient(np.array([norm, 0.0]), eps)
    assert descent_check(g) is expected


def test_epsilon_must_be_positive():
    with pytest.raises(ValueError):
        forecast([1.0], 0.0, NoiseSpec())
    with pytest.raises(ValueError):
        Forecaster(-1.0)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian")


def test_same_seed_same_sequence():
    a, b = Forecaster(0.2, NoiseSpec(seed=9)), Forecaster(0.2, NoiseSpec(seed=9))
    grads = np.random.default_rng(1).normal(size=(50, 3))
    for g in grads:
        np.testing.assert_array_equal(a(g).estimate, b(g).estimate)


def test_streams_are_paired_across_epsilon():
    # the unit noise direction is shared, only the radius scales
    a, b = Forecaster(0.1, NoiseSpec(seed=2)), Forecaster(0.01, NoiseSpec(seed=2))
    for _ in range(20):
        np.testing.assert_allclose(a(np.zeros(3)).estimate, 10 * b(np.zeros(3)).estimate, rtol=1e-11)


def test_descent_direction_over_random_trials():
    rng = np.random.default_rng(2024)
    violations = passed = 0
    for _ in range(10_000):
        n = rng.integers(1, 8)
        eps = 10 ** rng.uniform(-3, 0)
        grad = rng.normal(size=n) * 10 ** rng.uniform(-3, 1)
        mode = NOISE_MODES[rng.integers(0, 2)]
        g = forecast(grad, eps, NoiseSpec(mode), rng=rng)
        if descent_check(g):
            passed += 1
            violations += not (g.estimate @ grad > 0)
    assert violations == 0
    assert passed > 1000


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=6), st.floats(1e-6, 10.0), st.integers(0, 2**31))
def test_forecast_error_bound_property(grad, eps, seed):
    grad = np.array(grad)
    g = forecast(grad, eps, NoiseSpec("fixed-radius-sphere", seed))
    assert np.linalg.norm(g.estimate - grad) <= eps
    if descent_check(g):
        assert g.estimate @ grad > 0
