import numpy as np
import pytest

from minmetric.convex_body import (
    Ball, Cylinder, Ellipsoid, EuclideanFactor, HalfSpace, Product, random_polytope
)
from minmetric.distances import GeodesicGraph, build_boundary_mesh
from minmetric.finsler_metrics import make_evaluator


@pytest.fixture
def rng():
    yield np.random.default_rng(11)


@pytest.fixture(scope="module")
def ball():
    yield Ball(dim=3)


@pytest.fixture(scope="module")
def halfspace():
    yield HalfSpace(dim=3)


@pytest.fixture(scope="module")
def cylinder():
    yield Cylinder(dim=3)


@pytest.fixture(scope="module")
def ellipsoid():
    yield Ellipsoid(dim=3, semi_axes=np.array([1.0, 0.7, 0.5]))


@pytest.fixture(scope="module")
def polytope():
    yield random_polytope(np.random.default_rng(3), 3, 20)


@pytest.fixture(scope="module")
def line_times_disk():
    yield Product(factors=(EuclideanFactor(dim=1), Ball(dim=2, factor=True)))


@pytest.fixture(scope="module", params=[(400, 0)])
def create_graph(ball, request):
    nodes, sd = request.param

    def create_graph(tag="exact_minimal", body=ball, budget=nodes, seed=sd, **params):
        evaluator = make_evaluator(tag, body, **params)
        return GeodesicGraph.build(evaluator, budget, seed=seed, knn=8, collar_levels=6)

    yield create_graph


@pytest.fixture(scope="module")
def graph(create_graph):
    yield create_graph()


@pytest.fixture(scope="module", params=[2])
def create_mesh(ball, request):
    lvl = request.param

    def create_mesh(body=ball, level=lvl):
        return build_boundary_mesh(body, level)

    yield create_mesh


@pytest.fixture(scope="module")
def mesh(create_mesh):
    yield create_mesh()
