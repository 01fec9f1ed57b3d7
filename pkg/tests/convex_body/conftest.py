import numpy as np
import pytest

from minmetric.convex_body import (
    Ball, Cylinder, Ellipsoid, EuclideanFactor, HalfSpace, Polytope, Product
)

from .utils import cube_rows


@pytest.fixture
def rng():
    yield np.random.default_rng(42)


@pytest.fixture(scope="module", params=[1.0])
def create_ball(request):
    rad = request.param

    def create_ball(dim=3, radius=rad, center=None):
        return Ball(dim=dim, radius=radius, center=center)

    yield create_ball


@pytest.fixture(scope="module")
def ball(create_ball):
    yield create_ball()


@pytest.fixture(scope="module", params=[(2.0, 1.0, 1.0)])
def create_ellipsoid(request):
    axes = request.param

    def create_ellipsoid(semi_axes=axes, center=None):
        return Ellipsoid(dim=len(semi_axes), semi_axes=semi_axes, center=center)

    yield create_ellipsoid


@pytest.fixture(scope="module")
def ellipsoid(create_ellipsoid):
    yield create_ellipsoid()


@pytest.fixture(scope="module", params=[(1.0, 1.0)])
def create_cylinder(request):
    rad, hgt = request.param

    def create_cylinder(dim=3, radius=rad, height=hgt):
        return Cylinder(dim=dim, radius=radius, height=height)

    yield create_cylinder


@pytest.fixture(scope="module")
def cylinder(create_cylinder):
    yield create_cylinder()


@pytest.fixture(scope="module")
def create_cube():
    def create_cube(dim=3, half_width=1.0):
        normals, offsets = cube_rows(dim, half_width)
        return Polytope(dim=dim, normals=normals, offsets=offsets)

    yield create_cube


@pytest.fixture(scope="module")
def cube(create_cube):
    yield create_cube()


@pytest.fixture(scope="module")
def halfspace():
    yield HalfSpace(dim=3)


@pytest.fixture(scope="module")
def product():
    # R x B^2: one flat direction, no 2-flat
    yield Product(factors=(EuclideanFactor(dim=1), Ball(dim=2, factor=True)))
