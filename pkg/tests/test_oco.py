import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from poco.core import BoxSet, DimensionError
from poco.oco import OgdParams, OmdState, SigmaOgdParams, ogd_step, omd_step, sigma_ogd_step

unit = BoxSet([-1.0], [1.0])


@pytest.mark.parametrize("x, grad, eta, expected", [
    (0.0, 2.0, 0.1, -0.2),
    (1.0, 0.0, 0.7, 1.0),
    (0.9, -5.0, 0.1, 1.0),
])
def test_ogd_examples(x, grad, eta, expected):
    out = ogd_step([x], [grad], OgdParams(eta), unit)
    assert out[0] == pytest.approx(expected, abs=1e-15)


def test_sigma_ogd_examples():
    assert sigma_ogd_step([0.0], [2.0], SigmaOgdParams(1.0, 2.0), unit)[0] == -1.0
    wide = BoxSet([-2.0], [2.0])
    assert sigma_ogd_step([0.0], [2.0], SigmaOgdParams(0.5, 2.0), wide)[0] == pytest.approx(-0.5)
    for eta, gamma in [(1.0, 3.0), (0.2, 0.5)]:
        assert sigma_ogd_step([0.4], [0.0], SigmaOgdParams(eta, gamma), unit)[0] == 0.4


def test_param_validation():
    with pytest.raises(ValueError):
        OgdParams(0.0)
    with pytest.raises(ValueError):
        SigmaOgdParams(1.5, 1.0)
    with pytest.raises(ValueError):
        SigmaOgdParams(0.5, 0.0)


def test_ogd_step_for_horizon():
    assert OgdParams.for_horizon(100, diameter=2.0, grad_bound=4.0).eta == pytest.approx(0.05)
    assert OgdParams.for_horizon(400).eta == pytest.approx(0.05)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        ogd_step([0.0, 0.0], [1.0], OgdParams(0.1), BoxSet([-1, -1], [1, 1]))


vec3 = arrays(float, 3, elements=st.floats(-10, 10, allow_nan=False))
box3 = BoxSet([-1.0, -0.5, 0.0], [1.0, 0.5, 2.0])


@given(vec3, vec3, st.integers(-6, 6))
def test_sigma_ogd_with_unit_eta_is_ogd_dyadic(x, g, k):
    # dyadic steps make 1/gamma exact, so agreement is bitwise
    step = 2.0 ** k
    x = box3.project(x)
    a = sigma_ogd_step(x, g, SigmaOgdParams(1.0, 1.0 / step), box3)
    b = ogd_step(x, g, OgdParams(step), box3)
    np.testing.assert_array_equal(a, b)


@given(vec3, vec3, st.floats(1e-3, 10.0))
def test_sigma_ogd_with_unit_eta_is_ogd(x, g, step):
    x = box3.project(x)
    a = sigma_ogd_step(x, g, SigmaOgdParams(1.0, 1.0 / step), box3)
    b = ogd_step(x, g, OgdParams(step), box3)
    np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-14)


@given(vec3, vec3, vec3, st.floats(1e-3, 5.0), st.floats(1e-3, 1.0))
def test_steppers_stay_feasible(x, g, h, eta, lam):
    x = box3.project(x)
    assert box3.contains(ogd_step(x, g, OgdParams(eta), box3))
    assert box3.contains(sigma_ogd_step(x, g, SigmaOgdParams(lam, 1.0 / eta), box3), tol=1e-12)
    played, state = omd_step(OmdState(x, eta), g, h, box3)
    assert box3.contains(played) and box3.contains(state.y)


def test_omd_examples():
    played, state = omd_step(OmdState(np.array([0.3]), 0.5), [0.0], [0.0], unit)
    assert played[0] == state.y[0] == 0.3
    played, state = omd_step(OmdState(np.array([0.0]), 0.1), [1.0], [1.0], unit)
    assert state.y[0] == pytest.approx(-0.1)
    assert played[0] == pytest.approx(-0.2)


def test_omd_perfect_hints_approach_optimum_monotonically():
    box = BoxSet([-2.0], [2.0])
    state = OmdState(np.array([1.5]), 0.1)
    x = state.y
    dist = [abs(x[0])]
    for _ in range(100):
        # f(x) = x^2; the hint is the exact gradient at the point the hint is applied from
        revealed = 2 * x
        y_next = box.project(state.y - state.eta * revealed)
        x, state = omd_step(state, revealed, 2 * y_next, box)
        dist.append(abs(x[0]))
    assert all(b <= a for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 1e-6
