import numpy as np
import pytest

from minmetric.convex_body import Ball, Cylinder, HalfSpace
from minmetric.gromov import build_quasi_geodesic

from .utils import PLANE_SAMPLES, THETA_SAMPLES


@pytest.fixture
def rng():
    yield np.random.default_rng(19)


@pytest.fixture(scope="module")
def ball():
    yield Ball(dim=3)


@pytest.fixture(scope="module")
def cylinder():
    yield Cylinder(dim=3)


@pytest.fixture(scope="module")
def halfspace():
    yield HalfSpace(dim=3)


@pytest.fixture(scope="module", params=[(1.0, 9)])
def create_ray(ball, request):
    hrz, count = request.param

    def create_ray(body=ball, p=None, xi=None, epsilon=None, horizon=hrz, n=count,
                   certify=True):
        p = np.zeros(body.dim) if p is None else p
        xi = np.eye(body.dim)[0] if xi is None else xi
        return build_quasi_geodesic(body, p, xi, epsilon, horizon, n, certify,
                                    PLANE_SAMPLES, THETA_SAMPLES)

    yield create_ray


@pytest.fixture(scope="module")
def ray(create_ray):
    yield create_ray(epsilon=1.0)
