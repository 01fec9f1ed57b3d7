from enum import Enum

import numpy as np


class Pair(Enum):
    NEAR = ((0.1, 0.0, 0.0), (0.0, 0.2, 0.1))
    FAR = ((0.5, 0.3, 0.0), (-0.4, 0.2, 0.5))


def points(pair: Pair):
    """
    Returns the two endpoints of pair as arrays
    """
    x, y = pair.value
    return np.array(x), np.array(y)


def klein_distance(x, y) -> float:
    """
    Returns the distance of the unit-ball Klein model
    """
    num = 1.0 - float(np.dot(x, y))
    den = np.sqrt((1.0 - np.dot(x, x)) * (1.0 - np.dot(y, y)))
    return float(np.arccosh(max(num / den, 1.0)))
