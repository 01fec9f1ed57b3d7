from enum import Enum

import numpy as np


class Axis(Enum):
    X1 = 0
    X2 = 1
    X3 = 2


def unit(axis: Axis, dim: int = 3) -> np.ndarray:
    """
    Returns the standard basis vector along axis
    """
    e = np.zeros(dim)
    e[axis.value] = 1.0
    return e


def cube_rows(dim: int = 3, half_width: float = 1.0):
    """
    Returns (normals, offsets) of the cube |x_i| < half_width
    """
    eye = np.eye(dim)
    normals = np.vstack([eye, -eye])
    offsets = np.full(2 * dim, half_width)
    return normals, offsets


def cube_spec(half_width: float = 1.0) -> str:
    """
    Returns the body-spec text of the cube |x_i| < half_width in R^3
    """
    lines = ["kind = polytope", "dim = 3"]
    normals, offsets = cube_rows(3, half_width)
    for n, b in zip(normals, offsets):
        lines.append("halfspace = " + " ".join(f"{c:g}" for c in n) + f" ; {b:g}")
    return "\n".join(lines) + "\n"
