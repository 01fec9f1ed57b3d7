from enum import Enum

import numpy as np

from minmetric.convex_body import Cylinder, Ellipsoid, random_polytope


class Direction(Enum):
    RADIAL = "radial"
    TANGENTIAL = "tangential"


# coarse plane search so the tests stay fast
PLANE_SAMPLES = 64
THETA_SAMPLES = 64


def point_and_vector(radius: float, direction: Direction):
    """
    Returns a point at distance radius from the origin along e1 and a unit
    vector radial or tangential to the sphere through it
    """
    x = np.array([radius, 0.0, 0.0])
    v = np.array([1.0, 0.0, 0.0]) if direction is Direction.RADIAL else np.array([0.0, 1.0, 0.0])
    return x, v


def klein_metric(x, v) -> float:
    """
    Returns sqrt((1 - |x|^2)|v|^2 + <x, v>^2) / (1 - |x|^2)
    """
    s = 1.0 - float(np.dot(x, x))
    return float(np.sqrt(s * np.dot(v, v) + np.dot(x, v) ** 2) / s)


class Shape(Enum):
    ELLIPSOID = "ellipsoid"
    CYLINDER = "cylinder"
    POLYTOPE = "polytope"


def make_body(shape: Shape, rng: np.random.Generator):
    """
    Returns a body of the given shape in its canonical frame
    """
    if shape is Shape.ELLIPSOID:
        return Ellipsoid(dim=3, semi_axes=np.array([1.0, 0.7, 0.5]))
    if shape is Shape.CYLINDER:
        return Cylinder(dim=3)
    return random_polytope(rng, 3, 20)


def move(X, rotation, translation):
    """
    Returns the points X after x -> rotation @ x + translation
    """
    return np.asarray(X) @ rotation.T + translation
