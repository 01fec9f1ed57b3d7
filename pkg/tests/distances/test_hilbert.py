import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies
from pytest import approx

from minmetric.convex_body import Ball
from minmetric.distances import hilbert_distance, minimal_distance_lower
from minmetric.errors import NotInterior

from .utils import klein_distance


def test_hilbert_distance_radial(ball):
    expect = math.atanh(0.9)
    actual = hilbert_distance(ball, np.zeros(3), np.array([0.9, 0.0, 0.0]))
    assert expect == approx(actual)


def test_hilbert_distance_identity(ball):
    x = np.array([0.3, 0.1, -0.2])
    assert hilbert_distance(ball, x, x) == 0.0


@settings(max_examples=100, deadline=None)
@given(
    a=strategies.floats(min_value=-0.55, max_value=0.55),
    b=strategies.floats(min_value=-0.55, max_value=0.55),
    c=strategies.floats(min_value=-0.55, max_value=0.55),
    d=strategies.floats(min_value=-0.55, max_value=0.55))
def test_hilbert_distance_of_ball_is_klein(a, b, c, d):
    ball = Ball(dim=3)
    x = np.array([a, b, 0.0])
    y = np.array([c, 0.0, d])

    expect = klein_distance(x, y)
    actual = hilbert_distance(ball, x, y)
    assert expect == approx(actual, rel=1e-6, abs=1e-7)
    assert hilbert_distance(ball, y, x) == approx(actual, rel=1e-9, abs=1e-12)


def test_hilbert_distance_on_halfspace(halfspace):
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([math.e ** 2, 0.0, 0.0])
    assert hilbert_distance(halfspace, x, y) == approx(1.0)

    # parallel to the wall both endpoints are at infinity
    assert hilbert_distance(halfspace, x, np.array([1.0, 5.0, 0.0])) == 0.0


def test_hilbert_distance_batch(ball, rng):
    X = ball.sample_interior(rng, 10)
    Y = ball.sample_interior(rng, 10)
    expect = [klein_distance(x, y) for x, y in zip(X, Y)]
    actual = hilbert_distance(ball, X, Y)
    assert expect == approx(actual.tolist(), rel=1e-6)


def test_minimal_distance_lower_radial(ball):
    r = 0.9
    expect = -0.5 * math.log(1.0 - r)
    actual = minimal_distance_lower(ball, np.zeros(3), np.array([r, 0.0, 0.0]))
    assert expect == approx(actual)


def test_minimal_distance_lower_is_between_half_and_full_hilbert(cylinder, rng):
    X = cylinder.sample_interior(rng, 50)
    Y = cylinder.sample_interior(rng, 50)
    lower = minimal_distance_lower(cylinder, X, Y)
    h = hilbert_distance(cylinder, X, Y)
    assert np.all(lower >= 0.5 * h - 1e-12)
    assert np.all(lower <= h + 1e-12)


def test_distances_revert_outside(ball):
    with pytest.raises(NotInterior, match="HilbertDistance: x not interior"):
        hilbert_distance(ball, np.zeros(3), np.array([1.0, 0.0, 0.0]))

    with pytest.raises(NotInterior, match="MinimalLower: x not interior"):
        minimal_distance_lower(ball, np.array([2.0, 0.0, 0.0]), np.zeros(3))


def test_hilbert_distance_vanishes_along_the_line_factor(line_times_disk):
    x = np.array([0.0, 0.2, 0.1])
    y = np.array([3.0, 0.2, 0.1])
    assert hilbert_distance(line_times_disk, x, y) == approx(0.0, abs=1e-12)
    assert hilbert_distance(line_times_disk, x, np.array([0.0, 0.5, 0.1])) > 0.0


@pytest.mark.parametrize("name", ["cylinder", "ellipsoid", "polytope"])
def test_distances_are_symmetric(name, rng, request):
    body = request.getfixturevalue(name)
    X = body.sample_interior(rng, 10)
    Y = body.sample_interior(rng, 10)
    assert hilbert_distance(body, Y, X) == approx(hilbert_distance(body, X, Y), abs=1e-9)
    assert minimal_distance_lower(body, Y, X) == approx(minimal_distance_lower(body, X, Y),
                                                        abs=1e-9)


@pytest.mark.parametrize("name", ["ball", "cylinder", "ellipsoid", "polytope"])
def test_hilbert_distance_triangle_inequality(name, rng, request):
    body = request.getfixturevalue(name)
    X, Y, Z = (body.sample_interior(rng, 30) for _ in range(3))
    direct = hilbert_distance(body, X, Z)
    around = hilbert_distance(body, X, Y) + hilbert_distance(body, Y, Z)
    assert np.all(direct <= around + 1e-6)
