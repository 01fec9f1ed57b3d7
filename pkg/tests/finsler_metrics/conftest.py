import numpy as np
import pytest

from minmetric.convex_body import Ball, Cylinder, HalfSpace, random_rotation
from minmetric.finsler_metrics import make_evaluator

from .utils import PLANE_SAMPLES, THETA_SAMPLES, Shape, make_body


@pytest.fixture
def rng():
    yield np.random.default_rng(7)


@pytest.fixture(scope="module")
def ball():
    yield Ball(dim=3)


@pytest.fixture(scope="module")
def halfspace():
    yield HalfSpace(dim=3)


@pytest.fixture(scope="module")
def cylinder():
    yield Cylinder(dim=3)


@pytest.fixture(scope="module", params=["hilbert"])
def create_evaluator(ball, request):
    default_tag = request.param

    def create_evaluator(tag=default_tag, body=ball, **params):
        if tag == "minimal_upper":
            params.setdefault("plane_samples", PLANE_SAMPLES)
            params.setdefault("theta_samples", THETA_SAMPLES)
        return make_evaluator(tag, body, **params)

    yield create_evaluator


@pytest.fixture(scope="module")
def evaluator(create_evaluator):
    yield create_evaluator()


@pytest.fixture(scope="module", params=list(Shape))
def moved(request):
    rng = np.random.default_rng(19)
    body = make_body(request.param, rng)
    rotation = random_rotation(rng, 3)
    translation = rng.uniform(-2.0, 2.0, size=3)
    yield body, body.transformed(rotation, translation), rotation, translation
