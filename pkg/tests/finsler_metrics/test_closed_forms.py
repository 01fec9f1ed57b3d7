import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies
from pytest import approx

from minmetric.convex_body import Ball, HalfSpace
from minmetric.errors import NotInterior, UnknownMetric
from minmetric.finsler_metrics import (
    ball_minimal, estball_bound, exact_minimal, halfspace_minimal, hilbert_metric,
    minimal_lower_directional
)

from .utils import Direction, klein_metric, point_and_vector


def test_ball_minimal_at_center():
    x, v = point_and_vector(0.0, Direction.RADIAL)
    assert ball_minimal(x, v) == approx(1.0)


def test_ball_minimal_radial_and_tangential():
    x, v = point_and_vector(0.5, Direction.RADIAL)
    expect = 4.0 / 3.0
    actual = ball_minimal(x, v)
    assert expect == approx(actual)

    x, v = point_and_vector(0.5, Direction.TANGENTIAL)
    expect = 1.0 / math.sqrt(0.75)
    actual = ball_minimal(x, v)
    assert expect == approx(actual)


def test_ball_minimal_reverts_outside():
    with pytest.raises(NotInterior, match="BallMinimal: "):
        ball_minimal(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))


def test_halfspace_minimal():
    x = np.array([2.0, 5.0, -1.0])
    assert halfspace_minimal(x, np.array([1.0, 0.0, 0.0])) == approx(0.25)

    # tangential directions cost nothing
    assert halfspace_minimal(x, np.array([0.0, 3.0, 4.0])) == 0.0


def test_halfspace_minimal_reverts_outside():
    with pytest.raises(NotInterior, match="HalfSpaceMinimal: x1 <= 0"):
        halfspace_minimal(np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0]))


@settings(max_examples=100, deadline=None)
@given(
    r=strategies.floats(min_value=0.0, max_value=0.99),
    a=strategies.floats(min_value=-1, max_value=1),
    b=strategies.floats(min_value=-1, max_value=1),
    c=strategies.floats(min_value=-1, max_value=1))
def test_hilbert_metric_of_ball_is_klein(r, a, b, c):
    ball = Ball(dim=3)
    x = np.array([0.0, r, 0.0])
    v = np.array([a, b, c])
    assume(np.linalg.norm(v) > 1e-6)

    expect = klein_metric(x, v)
    actual = hilbert_metric(ball, x, v)
    assert expect == approx(actual, rel=1e-9)
    assert ball_minimal(x, v) == approx(actual, rel=1e-9)


def test_hilbert_metric_of_halfspace():
    halfspace = HalfSpace(dim=3)
    x = np.array([1.0, 0.0, 0.0])
    assert hilbert_metric(halfspace, x, np.array([1.0, 0.0, 0.0])) == approx(0.5)
    assert hilbert_metric(halfspace, x, np.array([0.0, 1.0, 1.0])) == 0.0


def test_hilbert_metric_zero_vector_is_zero(ball):
    assert hilbert_metric(ball, np.array([0.2, 0.1, 0.0]), np.zeros(3)) == 0.0


def test_hilbert_metric_is_absolutely_homogeneous(cylinder, rng):
    x = np.array([0.1, -0.3, 0.4])
    v = rng.normal(size=3)
    expect = 2.5 * hilbert_metric(cylinder, x, v)
    actual = hilbert_metric(cylinder, x, -2.5 * v)
    assert expect == approx(actual)


def test_exact_minimal_on_moved_ball():
    ball = Ball(dim=3, radius=2.0, center=np.array([1.0, 0.0, 0.0]))
    x = np.array([2.0, 0.5, 0.0])
    v = np.array([0.3, -1.0, 0.2])

    expect = ball_minimal((x - ball.center) / 2.0, v) / 2.0
    actual = exact_minimal(ball, x, v)
    assert expect == approx(actual)


def test_exact_minimal_on_halfspace(halfspace):
    x = np.array([0.5, 1.0, 2.0])
    v = np.array([2.0, 1.0, 0.0])
    assert exact_minimal(halfspace, x, v) == approx(halfspace_minimal(x, v))


def test_exact_minimal_reverts_without_closed_form(cylinder):
    with pytest.raises(UnknownMetric, match="MinimalMetric: no closed form on a cylinder"):
        exact_minimal(cylinder, cylinder.anchor, np.array([1.0, 0.0, 0.0]))


def test_minimal_lower_directional_is_half_hilbert(cylinder, rng):
    X = cylinder.sample_interior(rng, 20)
    V = rng.normal(size=(20, 3))
    expect = 0.5 * hilbert_metric(cylinder, X, V)
    actual = minimal_lower_directional(cylinder, X, V)
    assert expect.tolist() == approx(actual.tolist())


@settings(max_examples=100, deadline=None)
@given(
    r=strategies.floats(min_value=0.0, max_value=0.999),
    a=strategies.floats(min_value=-1, max_value=1),
    b=strategies.floats(min_value=-1, max_value=1))
def test_estball_bound_dominates_ball_minimal(r, a, b):
    x = np.array([r, 0.0, 0.0])
    v = np.array([a, b, 0.0])

    bound = estball_bound(x, v)
    exact = ball_minimal(x, v)
    assert bound >= exact * (1.0 - 1e-12)


def test_estball_bound_reverts_outside():
    with pytest.raises(NotInterior, match="EstBall: "):
        estball_bound(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
