from enum import Enum
from itertools import combinations

import numpy as np

from minmetric.gromov import PAIRS


class Shape(Enum):
    LINE = "line"
    SQUARE = "square"
    STAR = "star"


# coarse plane search so the tests stay fast
PLANE_SAMPLES = 64
THETA_SAMPLES = 64


def euclidean_distances(points) -> np.ndarray:
    """
    Returns the six pair distances of four points in PAIRS order
    """
    points = np.asarray(points, dtype=float)
    return np.array([np.linalg.norm(points[i] - points[j]) for i, j in PAIRS])


def quadruple(shape: Shape) -> np.ndarray:
    """
    Returns four planar points arranged as shape
    """
    if shape is Shape.LINE:
        return np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [7.0, 0.0]])
    if shape is Shape.SQUARE:
        return np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return np.array([[0.0, 0.0], [2.0, 0.0], [-1.0, 1.5], [-1.0, -1.5]])


def pair_count(n: int) -> int:
    """
    Returns the number of unordered pairs among n samples
    """
    return len(list(combinations(range(n), 2)))
