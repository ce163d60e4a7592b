import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from poco.core import BoxSet, DimensionError, diameter, finite_difference_gradient, project

from conftest import linear, quadratic

floats = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def box_and_points(draw, n_points=2):
    n = draw(st.integers(1, 6))
    a = draw(arrays(float, n, elements=floats))
    b = draw(arrays(float, n, elements=floats))
    box = BoxSet(np.minimum(a, b), np.maximum(a, b))
    pts = [draw(arrays(float, n, elements=st.floats(-1e4, 1e4, allow_nan=False))) for _ in range(n_points)]
    return box, pts


@pytest.mark.parametrize("lo, hi, point, expected", [
    ([0, 0], [1, 1], [2, -1], [1, 0]),
    ([0, 0], [1, 1], [0.3, 0.7], [0.3, 0.7]),
    ([-1, 0], [1, 3], [0.5, 5], [0.5, 3]),
])
def test_projection_examples(lo, hi, point, expected):
    np.testing.assert_array_equal(project(BoxSet(lo, hi), point), expected)


@pytest.mark.parametrize("lo, hi, expected", [
    ([0], [1], 1.0),
    ([0, 0], [1, 1], math.sqrt(2)),
    ([-2, 0], [2, 0], 4.0),
])
def test_diameter_examples(lo, hi, expected):
    assert diameter(BoxSet(lo, hi)) == pytest.approx(expected, abs=1e-12)


def test_diameter_is_largest_pairwise_distance():
    box = BoxSet([-1, 0, 2], [1, 0.5, 5])
    corners = np.array(np.meshgrid(*zip(box.lower, box.upper))).reshape(3, -1).T
    brute = max(np.linalg.norm(p - q) for p in corners for q in corners)
    assert box.diameter == pytest.approx(brute)


def test_radius_is_largest_feasible_norm():
    box = BoxSet([-3, 1], [2, 4])
    assert box.radius == pytest.approx(5.0)


def test_projection_rejects_wrong_dimension():
    with pytest.raises(DimensionError):
        project(BoxSet([0, 0], [1, 1]), [1, 2, 3])


def test_invalid_boxes_rejected():
    with pytest.raises(ValueError):
        BoxSet([1.0], [0.0])
    with pytest.raises(ValueError):
        BoxSet([0.0], [np.inf])
    with pytest.raises(DimensionError):
        BoxSet([0.0, 0.0], [1.0])


def test_degenerate_coordinate_is_pinned():
    box = BoxSet([-2, 0], [2, 0])
    np.testing.assert_array_equal(box.project([5, 7]), [2, 0])


def test_box_is_immutable():
    box = BoxSet([0, 0], [1, 1])
    with pytest.raises(ValueError):
        box.lower[0] = -1


@given(box_and_points(1))
def test_projection_idempotent_and_feasible(data):
    box, (p,) = data
    q = box.project(p)
    assert box.contains(q)
    np.testing.assert_array_equal(box.project(q), q)


@given(box_and_points(2))
def test_projection_nonexpansive(data):
    box, (p, q) = data
    lhs = np.linalg.norm(box.project(p) - box.project(q))
    assert lhs <= np.linalg.norm(p - q) * (1 + 1e-12) + 1e-12


@given(box_and_points(2))
def test_projection_is_nearest_point(data):
    # variational inequality: (p - P p).(y - P p) <= 0 for feasible y
    box, (p, y) = data
    y = box.project(y)
    pp = box.project(p)
    assert (p - pp) @ (y - pp) <= 1e-6 * (1 + np.linalg.norm(p) * np.linalg.norm(y))


def test_finite_difference_quadratic():
    f = quadratic([0.0])
    assert finite_difference_gradient(f, [1.0], step=1e-4)[0] == pytest.approx(2.0, abs=1e-6)


def test_finite_difference_linear_is_exact_up_to_rounding():
    c = np.array([1.5, -2.0, 0.25])
    g = finite_difference_gradient(linear(c), np.array([0.3, -0.1, 2.0]))
    np.testing.assert_allclose(g, c, rtol=1e-8)


def test_finite_difference_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        finite_difference_gradient(quadratic([0.0]), [1.0], step=0.0)


def test_loss_round_returns_float_and_array():
    f = quadratic([1.0, 2.0])
    assert isinstance(f([0, 0]), float) and f([0, 0]) == 5.0
    np.testing.assert_array_equal(f.grad([0, 0]), [-2.0, -4.0])
