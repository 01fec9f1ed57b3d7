import math

import numpy as np
import pytest
from pytest import approx

from minmetric.errors import AmbiguousProjection
from minmetric.finsler_metrics import model_F

from .utils import Direction, point_and_vector


def test_model_f_inside_the_collar(ball):
    x, v = point_and_vector(0.95, Direction.RADIAL)
    assert model_F(ball, x, v, epsilon=0.5) == approx(10.0)

    x, v = point_and_vector(0.95, Direction.TANGENTIAL)
    assert model_F(ball, x, v, epsilon=0.5) == approx(1.0 / math.sqrt(0.05))


def test_model_f_outside_the_collar(ball):
    x, v = point_and_vector(0.2, Direction.TANGENTIAL)

    # c defaults to 1 / (2 epsilon)
    assert model_F(ball, x, 3 * v, epsilon=0.5) == approx(3.0)
    assert model_F(ball, x, 3 * v, epsilon=0.5, c=2.0) == approx(6.0)


def test_model_f_mixed_vector(ball):
    x = np.array([0.0, 0.0, 0.9])
    v = np.array([1.0, 0.0, 1.0])

    # |v_N| / (2 delta) + |v_T| / sqrt(delta) with delta = 0.1
    expect = 1.0 / 0.2 + 1.0 / math.sqrt(0.1)
    actual = model_F(ball, x, v, epsilon=0.5)
    assert expect == approx(actual)


def test_model_f_is_absolutely_homogeneous(cylinder, rng):
    x = np.array([0.2, 0.1, 0.8])
    v = rng.normal(size=3)
    expect = 4.0 * model_F(cylinder, x, v, epsilon=0.5)
    actual = model_F(cylinder, x, -4.0 * v, epsilon=0.5)
    assert expect == approx(actual)


def test_model_f_zero_vector_is_zero(ball):
    # the center is ambiguous, but v = 0 never needs the projection
    assert model_F(ball, np.zeros(3), np.zeros(3), epsilon=2.0) == 0.0


def test_model_f_reverts_on_ambiguous_projection(ball):
    with pytest.raises(AmbiguousProjection,
                       match="ModelF: ambiguous projection inside the collar"):
        model_F(ball, np.zeros(3), np.array([1.0, 0.0, 0.0]), epsilon=2.0)
