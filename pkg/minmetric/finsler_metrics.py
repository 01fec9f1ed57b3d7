"""
Pointwise Finsler metric evaluators.

Every evaluator takes (x, v) as single vectors or as (n, d) batches and is
absolutely homogeneous in v; v = 0 evaluates to 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import numpy as np

from .config import map_threads
from .convex_body import (
    THETA_SAMPLES,
    Ball,
    ConvexBody,
    HalfSpace,
    as_pair,
    golden_section,
    planar_minima,
    unbatch,
)
from .errors import (
    AmbiguousProjection,
    ConfigError,
    DimensionMismatch,
    NotInterior,
    UnknownMetric,
    ZeroVector,
)

logger = logging.getLogger(__name__)

PLANE_SAMPLES = 512
ASCENT_ROUNDS = 3
ANGLE_ITERATIONS = 40
BATCH_DIRECTIONS = 1 << 18


class MetricTag(str, Enum):
    EXACT_MINIMAL = "exact_minimal"
    HILBERT = "hilbert"
    MODEL_F = "model_F"
    MINIMAL_LOWER = "minimal_lower"
    MINIMAL_UPPER = "minimal_upper"


@dataclass(frozen=True, eq=False)
class PlaneClearance:
    """
    Best planar boundary clearance found among the 2-planes containing v,
    with the unit vector u (orthogonal to v) spanning the winning plane.
    """
    value: float
    u: np.ndarray


def _norms(V):
    return np.linalg.norm(V, axis=1)


def ball_minimal(x, v):
    """
    Returns the minimal metric of the unit ball, which is the Klein metric
    """
    X, V, single = as_pair(x, v, np.shape(x)[-1], "BallMinimal")
    r2 = np.sum(X * X, axis=1)
    if np.any(r2 >= 1.0):
        raise NotInterior("BallMinimal: ||x|| >= 1")
    s = 1.0 - r2
    xv = np.sum(X * V, axis=1)
    return unbatch(np.sqrt(s * np.sum(V * V, axis=1) + xv * xv) / s, single)


def halfspace_minimal(x, v):
    """
    Returns |v1| / (2 x1), the minimal metric of {x1 > 0}
    """
    X, V, single = as_pair(x, v, np.shape(x)[-1], "HalfSpaceMinimal")
    if np.any(X[:, 0] <= 0.0):
        raise NotInterior("HalfSpaceMinimal: x1 <= 0")
    return unbatch(np.abs(V[:, 0]) / (2.0 * X[:, 0]), single)


def exact_minimal(body: ConvexBody, x, v):
    X, V, single = as_pair(x, v, body.dim, "MinimalMetric")
    body.require_interior(X, "MinimalMetric")
    Y = body.to_canonical(X)
    W = body.dir_to_canonical(V)
    if isinstance(body, Ball):
        out = ball_minimal((Y - body.center) / body.radius, W) / body.radius
        return unbatch(np.atleast_1d(out), single)
    if isinstance(body, HalfSpace):
        scale = np.linalg.norm(body.normal)
        slack = (body.offset - Y @ body.normal) / scale
        return unbatch(np.abs(W @ body.normal) / scale / (2.0 * slack), single)
    raise UnknownMetric(f"MinimalMetric: no closed form on a {body.kind}")


def hilbert_metric(body: ConvexBody, x, v):
    """
    Returns (1/2)(1/t- + 1/t+) where x - t- v and x + t+ v are the line exits;
    an infinite exit contributes 0
    """
    X, V, single = as_pair(x, v, body.dim, "HilbertMetric")
    body.require_interior(X, "HilbertMetric")
    out = np.zeros(len(V))
    moving = _norms(V) > 0
    if np.any(moving):
        Xm = np.broadcast_to(X, V.shape)[moving]
        forward = body._exit_w(Xm, V[moving])
        backward = body._exit_w(Xm, -V[moving])
        out[moving] = 0.5 * (1.0 / backward + 1.0 / forward)
    return unbatch(out, single)


def model_F(body: ConvexBody, x, v, epsilon: float, c: Optional[float] = None):
    """
    Returns the collar model metric: |v_N|/(2 delta) + |v_T|/sqrt(delta) inside
    the collar delta <= epsilon, c |v| outside. c defaults to 1/(2 epsilon).
    """
    if c is None:
        c = 1.0 / (2.0 * epsilon)
    X, V, single = as_pair(x, v, body.dim, "ModelF")
    body.require_interior(X, "ModelF")
    X = np.broadcast_to(X, V.shape)
    delta, _, N, ambiguous = body._collar_w(X)
    inside = delta <= epsilon
    moving = _norms(V) > 0
    if np.any(ambiguous & inside & moving):
        raise AmbiguousProjection("ModelF: ambiguous projection inside the collar")

    vn = np.sum(V * N, axis=1)
    vt = _norms(V - vn[:, None] * N)
    with np.errstate(divide="ignore", invalid="ignore"):
        collar = np.abs(vn) / (2.0 * delta) + vt / np.sqrt(delta)
    out = np.where(inside, collar, c * _norms(V))
    out[~moving] = 0.0
    return unbatch(out, single)


def _complement(W):
    """
    Returns (n, d - 1, d) orthonormal bases of the complements of the unit
    rows of W: the columns j != k of the Householder reflection taking W to
    -sign(W_k) e_k, with k the largest entry of W.
    """
    n, dim = W.shape
    rows = np.arange(n)
    k = np.argmax(np.abs(W), axis=1)
    h = W.copy()
    h[rows, k] += np.where(W[rows, k] >= 0.0, 1.0, -1.0)
    H = np.eye(dim)[None] - 2.0 * h[:, :, None] * h[:, None, :] / np.sum(h * h, axis=1)[:, None, None]
    keep = np.arange(dim)[None, :] != k[:, None]
    return H[keep].reshape(n, dim - 1, dim)


def _plane_coefficients(dim, plane_samples, seed):
    # the coordinate planes of the complement are always searched exactly
    if dim == 3:
        phi = np.linspace(0.0, np.pi, plane_samples, endpoint=False)
        coeffs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    else:
        rng = np.random.default_rng(seed)
        coeffs = rng.normal(size=(plane_samples, dim - 1))
        coeffs /= _norms(coeffs)[:, None]
    return np.vstack([coeffs, np.eye(dim - 1)])


def _grid_min(body, Y, W, U, theta):
    # min over theta of the canonical exits along cos W + sin U, row by row
    D = np.cos(theta)[None, :, None] * W[:, None, :] + np.sin(theta)[None, :, None] * U[:, None, :]
    t = body._exit(np.repeat(Y, len(theta), axis=0), D.reshape(-1, Y.shape[1]))
    return t.reshape(len(Y), len(theta)).min(axis=1)


def _plane_search(body, Y, W, plane_samples, theta_samples, seed=0):
    """
    Returns (clearance, u) for canonical points Y and unit directions W,
    u in canonical coordinates
    """
    n, dim = Y.shape
    comp = _complement(W)
    coeffs = _plane_coefficients(dim, plane_samples, seed)
    m = len(coeffs)
    theta = np.linspace(0.0, 2.0 * np.pi, theta_samples, endpoint=False)
    U = np.einsum("mk,nkd->nmd", coeffs, comp)
    scores = _grid_min(body, np.repeat(Y, m, axis=0), np.repeat(W, m, axis=0),
                       U.reshape(-1, dim), theta).reshape(n, m)
    pick = np.argmax(scores, axis=1)
    unbounded = np.isinf(scores[np.arange(n), pick])
    best = coeffs[pick]
    U_grid = np.einsum("nk,nkd->nd", best, comp)

    if dim == 3:
        # the clearance has a kink at its peak over the plane angle
        half = np.pi / plane_samples

        def plane(phi):
            return np.cos(phi)[:, None] * comp[:, 0] + np.sin(phi)[:, None] * comp[:, 1]

        def negative(phi):
            return -planar_minima(body, Y, W, plane(phi), theta_samples, starts=1,
                                  iterations=ANGLE_ITERATIONS // 2)

        phi = np.arctan2(best[:, 1], best[:, 0])
        phi, _ = golden_section(negative, phi - half, phi + half, ANGLE_ITERATIONS)
        U_best = plane(phi)
    else:
        # coordinate ascent on the coefficients of the best sample
        best_score = scores[np.arange(n), pick]
        for r in range(ASCENT_ROUNDS):
            step = 0.25 / 2 ** r
            for k in range(dim - 1):
                for sign in (1.0, -1.0):
                    trial = best.copy()
                    trial[:, k] += sign * step
                    trial /= _norms(trial)[:, None]
                    s = _grid_min(body, Y, W, np.einsum("nk,nkd->nd", trial, comp), theta)
                    better = s > best_score
                    best = np.where(better[:, None], trial, best)
                    best_score = np.where(better, s, best_score)
        U_best = np.einsum("nk,nkd->nd", best, comp)

    at_grid = planar_minima(body, Y, W, U_grid, theta_samples)
    at_best = planar_minima(body, Y, W, U_best, theta_samples)
    value = np.maximum(at_grid, at_best)
    u = np.where((at_best > at_grid)[:, None], U_best, U_grid)
    value[unbounded] = math.inf
    u[unbounded] = U_grid[unbounded]
    logger.debug("plane search over %d points, %d planes", n, m)
    return value, u


def _chunk(dim, plane_samples, theta_samples):
    return max(1, BATCH_DIRECTIONS // ((plane_samples + dim - 1) * theta_samples))


def plane_clearance(body: ConvexBody, x, v, plane_samples: int = PLANE_SAMPLES,
                    theta_samples: int = THETA_SAMPLES, seed: int = 0) -> PlaneClearance:
    """
    Returns the largest planar boundary clearance found over 2-planes
    through x containing v. The search can miss the optimal plane, so the
    value is a lower bound for the true supremum.
    """
    X, V, single = as_pair(x, v, body.dim, "PlaneSearch")
    if not single:
        raise DimensionMismatch("PlaneSearch: takes one point")
    norm = float(np.linalg.norm(V[0]))
    if norm == 0.0:
        raise ZeroVector("PlaneSearch: v = 0")
    body.require_interior(X, "PlaneSearch")
    value, u = _plane_search(body, body.to_canonical(X[:1]), body.dir_to_canonical(V[:1] / norm),
                             plane_samples, theta_samples, seed)
    return PlaneClearance(float(value[0]), body.dir_to_world(u)[0])


def minimal_upper(body: ConvexBody, x, v, plane_samples: int = PLANE_SAMPLES,
                  theta_samples: int = THETA_SAMPLES):
    """
    Returns |v| / clearance, a certified upper bound for the minimal metric
    (possibly not tight)
    """
    X, V, single = as_pair(x, v, body.dim, "MinimalUpper")
    body.require_interior(X, "MinimalUpper")
    X = np.broadcast_to(X, V.shape)
    norms = _norms(V)
    out = np.zeros(len(V))
    moving = np.flatnonzero(norms > 0.0)
    if len(moving):
        Y = body.to_canonical(X[moving])
        W = body.dir_to_canonical(V[moving] / norms[moving, None])
        size = _chunk(body.dim, plane_samples, theta_samples)
        parts = map_threads(
            lambda s: _plane_search(body, Y[s:s + size], W[s:s + size],
                                    plane_samples, theta_samples)[0],
            range(0, len(moving), size))
        clearance = np.concatenate(parts)
        out[moving] = np.where(np.isinf(clearance), 0.0, norms[moving] / clearance)
    return unbatch(out, single)


def minimal_lower_directional(body: ConvexBody, x, v):
    """
    Returns half the Hilbert metric, a certified lower bound for the
    minimal metric of a convex body
    """
    out = hilbert_metric(body, x, v)
    return 0.5 * out


def estball_bound(x, v):
    """
    Returns 2 (|v_N| / (2 delta) + |v_T| / sqrt(delta)) with delta = 1 - |x|,
    the upper estimate of the unit-ball minimal metric
    """
    X, V, single = as_pair(x, v, np.shape(x)[-1], "EstBall")
    r = _norms(X)
    if np.any(r >= 1.0):
        raise NotInterior("EstBall: ||x|| >= 1")
    delta = 1.0 - r
    N = X / np.where(r > 0, r, 1.0)[:, None]
    vn = np.sum(V * N, axis=1)
    vt = _norms(V - vn[:, None] * N)
    return unbatch(2.0 * (np.abs(vn) / (2.0 * delta) + vt / np.sqrt(delta)), single)


def sharp_constant_ratio(body: ConvexBody, x, v, plane_samples: int = PLANE_SAMPLES):
    """
    Returns hilbert / minimal_upper, a lower bound for the ratio h/g
    """
    X, V, single = as_pair(x, v, body.dim, "SharpConstant")
    h = hilbert_metric(body, X, V)
    g = minimal_upper(body, X, V, plane_samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(g > 0, h / np.where(g > 0, g, 1.0), 0.0)
    return unbatch(ratio, single)


@dataclass(frozen=True, eq=False)
class MetricEvaluator:
    tag: MetricTag
    body: ConvexBody
    params: Mapping[str, float] = field(default_factory=dict)

    def __call__(self, x, v):
        if self.tag is MetricTag.EXACT_MINIMAL:
            return exact_minimal(self.body, x, v)
        if self.tag is MetricTag.HILBERT:
            return hilbert_metric(self.body, x, v)
        if self.tag is MetricTag.MODEL_F:
            return model_F(self.body, x, v, self.params["epsilon"], self.params.get("c"))
        if self.tag is MetricTag.MINIMAL_LOWER:
            return minimal_lower_directional(self.body, x, v)
        return minimal_upper(self.body, x, v,
                             int(self.params.get("plane_samples", PLANE_SAMPLES)),
                             int(self.params.get("theta_samples", THETA_SAMPLES)))

    @property
    def epsilon(self) -> Optional[float]:
        return self.params.get("epsilon")


def make_evaluator(tag, body: ConvexBody, **params) -> MetricEvaluator:
    try:
        tag = MetricTag(tag)
    except ValueError:
        raise UnknownMetric(f"MetricEvaluator: unknown tag '{tag}'")
    if tag is MetricTag.EXACT_MINIMAL and not isinstance(body, (Ball, HalfSpace)):
        raise UnknownMetric(f"MinimalMetric: no closed form on a {body.kind}")
    params = {k: v for k, v in params.items() if v is not None}
    if tag is MetricTag.MODEL_F:
        params.setdefault("epsilon", 0.5)
        if not params["epsilon"] > 0:
            raise ConfigError("ModelF: epsilon must be positive")
    return MetricEvaluator(tag, body, params)
