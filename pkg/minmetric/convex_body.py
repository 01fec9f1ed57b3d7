"""
Convex body catalog and the geometric oracles the metric code runs on.

Every body is an open convex set in R^d held in a canonical frame plus a
rigid motion (rotation, translation). Public oracles take world
coordinates, either a single point ``(d,)`` or a batch ``(n, d)``, and
return Python floats or numpy arrays to match. Infinite exits are
``math.inf``.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import ClassVar, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, linprog
from scipy.stats import special_ortho_group

from .errors import (
    AmbiguousProjection,
    DimensionMismatch,
    InvalidBody,
    NotInterior,
    PlaneError,
    SpecParseError,
    UnboundedBody,
    ZeroVector,
)

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-9
TIE_TOL = 1e-9
THETA_SAMPLES = 256
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Location(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """
    A boundary location with its outer unit normal. In batch mode both
    fields are ``(n, d)`` arrays.
    """
    point: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class CollarDecomposition:
    delta: float
    projection: BoundaryPoint
    v_normal: np.ndarray
    v_tangent: np.ndarray


@dataclass(frozen=True, eq=False)
class FlatPatch:
    """
    Open disk of radius ``radius`` around ``origin`` in the affine plane
    ``origin + span(basis)``, contained in the boundary.
    """
    origin: np.ndarray
    basis: np.ndarray
    radius: float

    def sample(self, rng: np.random.Generator, n: int,
               radius: Optional[float] = None) -> np.ndarray:
        r = min(0.99 * self.radius, radius if radius is not None else 1.0)
        rho = r * np.sqrt(rng.uniform(size=n))
        phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
        return (self.origin
                + (rho * np.cos(phi))[:, None] * self.basis[0]
                + (rho * np.sin(phi))[:, None] * self.basis[1])


def as_batch(x, dim: int, component: str = "ConvexBody") -> Tuple[np.ndarray, bool]:
    """
    Returns (points as an (n, d) array, whether the input was one point)
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[-1] != dim:
        raise DimensionMismatch(
            f"{component}: expected dimension {dim}, got shape {arr.shape}")
    return np.atleast_2d(arr), arr.ndim == 1


def as_pair(x, v, dim: int, component: str = "ConvexBody"):
    X, sx = as_batch(x, dim, component)
    V, sv = as_batch(v, dim, component)
    if len(X) != len(V):
        if len(X) == 1:
            X = np.broadcast_to(X, V.shape)
        elif len(V) == 1:
            V = np.broadcast_to(V, X.shape)
        else:
            raise DimensionMismatch(
                f"{component}: batch sizes {len(X)} and {len(V)} differ")
    return X, V, sx and sv


def unbatch(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    return special_ortho_group.rvs(dim, random_state=rng)


def _safe_div(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)


@dataclass(frozen=True, eq=False, kw_only=True)
class ConvexBody:
    """
    Base class. Subclasses implement the canonical-frame oracles
    ``_level``, ``_depth``, ``_exit``, ``_collar``, ``_normal``,
    ``_bbox`` and ``_anchor``.
    """
    dim: int
    rotation: Optional[np.ndarray] = None
    translation: Optional[np.ndarray] = None
    factor: bool = False

    kind: ClassVar[str] = "body"

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidBody(f"{type(self).__name__}: dim must be positive")
        if not self.factor and self.dim < 3:
            raise InvalidBody(f"{type(self).__name__}: dim must be at least 3")

        rotation = (np.eye(self.dim) if self.rotation is None
                    else np.asarray(self.rotation, dtype=float))
        translation = (np.zeros(self.dim) if self.translation is None
                       else np.asarray(self.translation, dtype=float))
        if rotation.shape != (self.dim, self.dim) or not np.allclose(
                rotation.T @ rotation, np.eye(self.dim), atol=1e-9):
            raise InvalidBody(f"{type(self).__name__}: rotation is not orthogonal")
        if translation.shape != (self.dim,):
            raise InvalidBody(f"{type(self).__name__}: translation has wrong shape")
        self._set("rotation", rotation)
        self._set("translation", translation)
        self._setup()

    def _set(self, name, value):
        object.__setattr__(self, name, value)

    def _setup(self):
        pass

    # frame
    def to_canonical(self, X: np.ndarray) -> np.ndarray:
        return (X - self.translation) @ self.rotation

    def dir_to_canonical(self, V: np.ndarray) -> np.ndarray:
        return V @ self.rotation

    def to_world(self, Y: np.ndarray) -> np.ndarray:
        return Y @ self.rotation.T + self.translation

    def dir_to_world(self, W: np.ndarray) -> np.ndarray:
        return W @ self.rotation.T

    def transformed(self, rotation, translation) -> "ConvexBody":
        """
        Returns the body moved by x -> rotation @ x + translation
        """
        rotation = np.asarray(rotation, dtype=float)
        translation = np.asarray(translation, dtype=float)
        return dataclasses.replace(
            self,
            rotation=rotation @ self.rotation,
            translation=rotation @ self.translation + translation)

    # world-frame internals, no validation
    def _level_w(self, X):
        return self._level(self.to_canonical(X))

    def _depth_w(self, X):
        return self._depth(self.to_canonical(X))

    def _exit_w(self, X, V):
        return self._exit(self.to_canonical(X), self.dir_to_canonical(V))

    def _collar_w(self, X):
        delta, P, N, ambiguous = self._collar(self.to_canonical(X))
        return delta, self.to_world(P), self.dir_to_world(N), ambiguous

    def _normal_w(self, P):
        return self.dir_to_world(self._normal(self.to_canonical(P)))

    # classification data
    @property
    def lineality_dim(self) -> int:
        return 0

    @property
    def contains_two_flat(self) -> bool:
        return self.lineality_dim >= 2

    @property
    def collar_epsilon(self) -> float:
        return math.inf

    @property
    def flat_boundary_patch(self) -> Optional[FlatPatch]:
        return None

    @property
    def params(self) -> dict:
        return {}

    @property
    def anchor(self) -> np.ndarray:
        return self.to_world(self._anchor()[None, :])[0]

    @property
    def bounded(self) -> bool:
        lo, hi = self._bbox()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns the canonical-frame bounding box (may be infinite)
        """
        return self._bbox()

    def _world_bbox(self):
        lo, hi = self._bbox()
        if np.allclose(self.rotation, np.eye(self.dim)):
            return lo + self.translation, hi + self.translation
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            return np.full(self.dim, -math.inf), np.full(self.dim, math.inf)
        corners = np.array(np.meshgrid(*zip(lo, hi))).reshape(self.dim, -1).T
        world = self.to_world(corners)
        return world.min(axis=0), world.max(axis=0)

    # oracles
    def interior_mask(self, x) -> np.ndarray:
        X, _ = as_batch(x, self.dim)
        return self._level_w(X) < -BOUNDARY_TOL

    def require_interior(self, X: np.ndarray, component: str = "ConvexBody"):
        if not np.all(self._level_w(X) < -BOUNDARY_TOL):
            raise NotInterior(f"{component}: x not interior")

    def contains(self, x) -> Union[Location, List[Location]]:
        X, single = as_batch(x, self.dim)
        out = []
        for level in self._level_w(X):
            if level < -BOUNDARY_TOL:
                out.append(Location.INTERIOR)
            elif level <= BOUNDARY_TOL:
                out.append(Location.BOUNDARY)
            else:
                out.append(Location.EXTERIOR)
        return out[0] if single else out

    def ray_exit(self, x, v):
        X, V, single = as_pair(x, v, self.dim)
        if np.any(np.linalg.norm(V, axis=1) == 0):
            raise ZeroVector("ConvexBody: v = 0")
        self.require_interior(X)
        return unbatch(self._exit_w(X, V), single)

    def ray_exit_many(self, x, V) -> np.ndarray:
        """
        Returns exit parameters of the rays from one interior point x along
        every row of V
        """
        X, single = as_batch(x, self.dim)
        if not single:
            raise DimensionMismatch("ConvexBody: ray_exit_many takes one point")
        V = np.atleast_2d(np.asarray(V, dtype=float))
        self.require_interior(X)
        return self._exit_w(X, V)

    def line_exits(self, x, v):
        """
        Returns (t-, t+): the line x + t v leaves the body at t = -t- and t = t+
        """
        X, V, single = as_pair(x, v, self.dim)
        if np.any(np.linalg.norm(V, axis=1) == 0):
            raise ZeroVector("ConvexBody: v = 0")
        self.require_interior(X)
        return (unbatch(self._exit_w(X, -V), single),
                unbatch(self._exit_w(X, V), single))

    def boundary_distance(self, x):
        X, single = as_batch(x, self.dim)
        self.require_interior(X)
        return unbatch(self._depth_w(X), single)

    def collar_frame(self, x):
        """
        Returns (delta, projections, normals, ambiguous) for a batch of
        interior points; ambiguous rows have no unique nearest point.
        """
        X, _ = as_batch(x, self.dim)
        self.require_interior(X)
        return self._collar_w(X)

    def nearest_boundary(self, x) -> BoundaryPoint:
        X, single = as_batch(x, self.dim)
        self.require_interior(X)
        _, P, N, _ = self._collar_w(X)
        return BoundaryPoint(P[0], N[0]) if single else BoundaryPoint(P, N)

    def collar_decompose(self, x, v) -> CollarDecomposition:
        X, V, single = as_pair(x, v, self.dim)
        if not single:
            raise DimensionMismatch("ConvexBody: collar_decompose takes one point")
        self.require_interior(X)
        delta, P, N, ambiguous = self._collar_w(X)
        if ambiguous[0] or not delta[0] < self.collar_epsilon:
            raise AmbiguousProjection(
                f"ConvexBody: x outside the uniqueness collar (delta={delta[0]:.6g})")
        n = N[0]
        v = V[0]
        v_normal = np.dot(v, n) * n
        return CollarDecomposition(
            delta=float(delta[0]),
            projection=BoundaryPoint(P[0], n),
            v_normal=v_normal,
            v_tangent=v - v_normal,
        )

    def normal_at(self, p) -> np.ndarray:
        P, single = as_batch(p, self.dim)
        N = self._normal_w(P)
        return N[0] if single else N

    def boundary_point(self, direction, anchor=None) -> BoundaryPoint:
        """
        Returns where the ray from the anchor along direction meets the boundary
        """
        anchor = self.anchor if anchor is None else np.asarray(anchor, dtype=float)
        W, single = as_batch(direction, self.dim)
        t = self.ray_exit(anchor, W)
        t = np.atleast_1d(t)
        if not np.all(np.isfinite(t)):
            raise UnboundedBody("ConvexBody: ray from the anchor never leaves the body")
        P = anchor + t[:, None] * W
        N = self._normal_w(P)
        return BoundaryPoint(P[0], N[0]) if single else BoundaryPoint(P, N)

    def planar_distance(self, x, plane, samples: int = THETA_SAMPLES) -> float:
        X, single = as_batch(x, self.dim)
        if not single:
            raise DimensionMismatch("ConvexBody: planar_distance takes one point")
        e1, e2 = plane_basis(plane, self.dim)
        self.require_interior(X)
        return planar_minimum(self, X[0], e1, e2, samples)

    # sampling
    def sample_interior(self, rng: np.random.Generator, n: int,
                        window: Optional[Tuple[Sequence[float], float]] = None
                        ) -> np.ndarray:
        """
        Returns n points uniform in the body, or in the body intersected with
        a canonical-frame cube ``window = (center, half_width)``
        """
        lo, hi = self._bbox()
        if window is not None:
            center = self.to_canonical(np.asarray(window[0], dtype=float)[None])[0]
            lo = np.maximum(lo, center - window[1])
            hi = np.minimum(hi, center + window[1])
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedBody(f"{type(self).__name__}: sampling needs a window")

        found = []
        count = 0
        for _ in range(1000):
            Y = rng.uniform(lo, hi, size=(max(2 * n, 1024), self.dim))
            Y = Y[self._level(Y) < -BOUNDARY_TOL]
            found.append(Y)
            count += len(Y)
            if count >= n:
                return self.to_world(np.concatenate(found)[:n])
        raise InvalidBody(f"{type(self).__name__}: sampling window misses the body")

    def sample_collar(self, rng: np.random.Generator, n: int,
                      levels: Sequence[float]) -> np.ndarray:
        """
        Returns n interior points at distance from the boundary drawn from levels
        """
        levels = np.asarray(levels, dtype=float)
        found = []
        count = 0
        for _ in range(1000):
            W = rng.normal(size=(max(2 * n, 256), self.dim))
            bp = self.boundary_point(W)
            X = bp.point - rng.choice(levels, size=len(W))[:, None] * bp.normal
            X = X[self._level_w(X) < -BOUNDARY_TOL]
            found.append(X)
            count += len(X)
            if count >= n:
                return np.concatenate(found)[:n]
        raise InvalidBody(f"{type(self).__name__}: collar levels miss the body")


def plane_basis(plane, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns an orthonormal basis of the 2-plane spanned by the rows of plane
    """
    plane = np.asarray(plane, dtype=float)
    if plane.shape != (2, dim):
        raise PlaneError(f"ConvexBody: plane must be 2 x {dim}, got {plane.shape}")
    Q, R = np.linalg.qr(plane.T)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise PlaneError("ConvexBody: plane is not 2-dimensional")
    return Q[:, 0], Q[:, 1]


def golden_section(fn, lo, hi, iterations: int = 50) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns (argmin, min) of fn on each interval [lo_i, hi_i], with one
    golden-section search per element run side by side. fn maps an array of
    abscissae to an array of values. The best value seen is kept, so a
    function that is not unimodal still returns its best sample.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    best_x = np.where(fc <= fd, c, d)
    best_f = np.minimum(fc, fd)
    for _ in range(iterations):
        left = fc <= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        new = np.where(left, b - GOLDEN * (b - a), a + GOLDEN * (b - a))
        f_new = fn(new)
        c, d, fc, fd = (np.where(left, new, d), np.where(left, c, new),
                        np.where(left, f_new, fd), np.where(left, fc, f_new))
        better = f_new < best_f
        best_x = np.where(better, new, best_x)
        best_f = np.where(better, f_new, best_f)
    return best_x, best_f


def planar_minima(body: ConvexBody, Y: np.ndarray, E1: np.ndarray, E2: np.ndarray,
                  samples: int = THETA_SAMPLES, starts: int = 3,
                  iterations: int = 50) -> np.ndarray:
    """
    Returns, for each canonical point Y[i], the smallest exit distance over
    unit directions in span(E1[i], E2[i]): a grid over the circle, then
    golden-section refinement around the best grid samples. inf when no
    direction leaves the body.
    """
    n, dim = Y.shape
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    step = theta[1] - theta[0]
    D = (np.cos(theta)[None, :, None] * E1[:, None, :]
         + np.sin(theta)[None, :, None] * E2[:, None, :])
    t = body._exit(np.repeat(Y, samples, axis=0), D.reshape(-1, dim)).reshape(n, samples)
    best = t.min(axis=1)
    if starts == 0 or iterations == 0:
        return best

    centre = theta[np.argsort(t, axis=1, kind="stable")[:, :starts]].ravel()
    Yk = np.repeat(Y, starts, axis=0)
    E1k = np.repeat(E1, starts, axis=0)
    E2k = np.repeat(E2, starts, axis=0)

    def exit_at(angle):
        return body._exit(Yk, np.cos(angle)[:, None] * E1k + np.sin(angle)[:, None] * E2k)

    _, refined = golden_section(exit_at, centre - step, centre + step, iterations)
    return np.minimum(best, refined.reshape(n, starts).min(axis=1))


def planar_minimum(body: ConvexBody, x: np.ndarray, e1: np.ndarray, e2: np.ndarray,
                   samples: int = THETA_SAMPLES, starts: int = 3) -> float:
    """
    Returns the smallest exit distance from the world point x over unit
    directions in span(e1, e2)
    """
    Y = body.to_canonical(np.asarray(x, dtype=float)[None, :])
    E = body.dir_to_canonical(np.stack([e1, e2]).astype(float))
    return float(planar_minima(body, Y, E[:1], E[1:], samples, starts)[0])


@dataclass(frozen=True, eq=False, kw_only=True)
class Ball(ConvexBody):
    radius: float = 1.0
    center: Optional[np.ndarray] = None

    kind: ClassVar[str] = "ball"

    def _setup(self):
        if not self.radius > 0:
            raise InvalidBody("Ball: radius must be positive")
        center = np.zeros(self.dim) if self.center is None else np.asarray(self.center, float)
        if center.shape != (self.dim,):
            raise InvalidBody("Ball: center has wrong dimension")
        self._set("center", center)

    @property
    def params(self):
        return {"radius": self.radius, "center": self.center.tolist()}

    @property
    def collar_epsilon(self):
        return self.radius

    def _level(self, Y):
        return np.linalg.norm(Y - self.center, axis=1) - self.radius

    def _depth(self, Y):
        return self.radius - np.linalg.norm(Y - self.center, axis=1)

    def _exit(self, Y, W):
        Z = Y - self.center
        a = np.sum(W * W, axis=1)
        b = np.sum(Z * W, axis=1)
        c = np.sum(Z * Z, axis=1) - self.radius ** 2
        disc = np.sqrt(np.maximum(b * b - a * c, 0.0))
        return _safe_div(-b + disc, a)

    def _collar(self, Y):
        Z = Y - self.center
        r = np.linalg.norm(Z, axis=1)
        ambiguous = r < 1e-12
        N = Z / np.where(ambiguous, 1.0, r)[:, None]
        N[ambiguous] = np.eye(self.dim)[0]
        return self.radius - r, self.center + self.radius * N, N, ambiguous

    def _normal(self, P):
        Z = P - self.center
        return Z / np.linalg.norm(Z, axis=1)[:, None]

    def _bbox(self):
        return self.center - self.radius, self.center + self.radius

    def _anchor(self):
        return self.center


@dataclass(frozen=True, eq=False, kw_only=True)
class Ellipsoid(ConvexBody):
    semi_axes: Sequence[float] = ()
    center: Optional[np.ndarray] = None

    kind: ClassVar[str] = "ellipsoid"

    def _setup(self):
        axes = np.asarray(self.semi_axes, dtype=float)
        if axes.shape != (self.dim,) or np.any(axes <= 0):
            raise InvalidBody("Ellipsoid: semi_axes must be dim positive numbers")
        center = np.zeros(self.dim) if self.center is None else np.asarray(self.center, float)
        self._set("semi_axes", axes)
        self._set("center", center)

    @property
    def params(self):
        return {"semi_axes": self.semi_axes.tolist(), "center": self.center.tolist()}

    @property
    def collar_epsilon(self):
        return float(self.semi_axes.min() ** 2 / self.semi_axes.max())

    def _level(self, Y):
        scaled = np.linalg.norm((Y - self.center) / self.semi_axes, axis=1)
        return (scaled - 1.0) * self.semi_axes.min()

    def _exit(self, Y, W):
        Z = (Y - self.center) / self.semi_axes
        U = W / self.semi_axes
        a = np.sum(U * U, axis=1)
        b = np.sum(Z * U, axis=1)
        c = np.sum(Z * Z, axis=1) - 1.0
        disc = np.sqrt(np.maximum(b * b - a * c, 0.0))
        return _safe_div(-b + disc, a)

    def _nearest_one(self, z):
        # nearest point p_i = a_i^2 z_i / (a_i^2 + t) with the multiplier t
        # in (-a_min^2, 0) for interior z
        a = self.semi_axes
        a2 = a * a

        def excess(t):
            return float(np.sum((a * z / (a2 + t)) ** 2) - 1.0)

        lo = -a2.min() * (1.0 - 1e-12)
        if excess(0.0) >= 0.0:
            return z.copy(), False
        if excess(lo) <= 0.0:
            # medial region: no root, the projection is not unique
            return a2 * z / (a2 + lo), True
        t = brentq(excess, lo, 0.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return a2 * z / (a2 + t), False

    def _collar(self, Y):
        Z = Y - self.center
        P = np.empty_like(Z)
        ambiguous = np.zeros(len(Z), dtype=bool)
        for i, z in enumerate(Z):
            P[i], ambiguous[i] = self._nearest_one(z)
        delta = np.linalg.norm(Z - P, axis=1)
        return delta, P + self.center, self._normal(P + self.center), ambiguous

    def _depth(self, Y):
        return self._collar(Y)[0]

    def _normal(self, P):
        G = (P - self.center) / self.semi_axes ** 2
        return G / np.linalg.norm(G, axis=1)[:, None]

    def _bbox(self):
        return self.center - self.semi_axes, self.center + self.semi_axes

    def _anchor(self):
        return self.center


@dataclass(frozen=True, eq=False, kw_only=True)
class Cylinder(ConvexBody):
    """
    Disk of radius ``radius`` in the first d-1 coordinates times (0, height).
    """
    radius: float = 1.0
    height: float = 1.0

    kind: ClassVar[str] = "cylinder"

    def _setup(self):
        if not (self.radius > 0 and self.height > 0):
            raise InvalidBody("Cylinder: radius and height must be positive")

    @property
    def params(self):
        return {"radius": self.radius, "height": self.height}

    @property
    def collar_epsilon(self):
        return self.radius

    @property
    def flat_boundary_patch(self):
        origin = np.zeros(self.dim)
        origin[-1] = self.height
        basis = np.eye(self.dim)[:2]
        return FlatPatch(self.to_world(origin[None])[0], self.dir_to_world(basis),
                         self.radius)

    def _parts(self, Y):
        rho = np.linalg.norm(Y[:, :-1], axis=1)
        z = Y[:, -1]
        return np.stack([self.radius - rho, z, self.height - z], axis=1), rho

    def _level(self, Y):
        return -self._parts(Y)[0].min(axis=1)

    def _depth(self, Y):
        return self._parts(Y)[0].min(axis=1)

    def _exit(self, Y, W):
        Yr, Wr = Y[:, :-1], W[:, :-1]
        a = np.sum(Wr * Wr, axis=1)
        b = np.sum(Yr * Wr, axis=1)
        c = np.sum(Yr * Yr, axis=1) - self.radius ** 2
        side = _safe_div(-b + np.sqrt(np.maximum(b * b - a * c, 0.0)), a)
        z, w = Y[:, -1], W[:, -1]
        top = _safe_div(self.height - z, w)
        bottom = _safe_div(z, -w)
        return np.minimum(side, np.minimum(top, bottom))

    def _collar(self, Y):
        parts, rho = self._parts(Y)
        order = np.sort(parts, axis=1)
        which = parts.argmin(axis=1)
        ambiguous = order[:, 1] - order[:, 0] <= TIE_TOL
        ambiguous |= (which == 0) & (rho < 1e-12)

        n = len(Y)
        P = Y.copy()
        N = np.zeros_like(Y)
        side = which == 0
        radial = Y[side, :-1] / np.where(rho[side] > 0, rho[side], 1.0)[:, None]
        P[side, :-1] = self.radius * radial
        N[side, :-1] = radial
        P[which == 1, -1] = 0.0
        N[which == 1, -1] = -1.0
        P[which == 2, -1] = self.height
        N[which == 2, -1] = 1.0
        return parts[np.arange(n), which], P, N, ambiguous

    def _normal(self, P):
        parts, rho = self._parts(P)
        which = parts.argmin(axis=1)
        N = np.zeros_like(P)
        side = which == 0
        N[side, :-1] = P[side, :-1] / np.where(rho[side] > 0, rho[side], 1.0)[:, None]
        N[which == 1, -1] = -1.0
        N[which == 2, -1] = 1.0
        return N

    def _bbox(self):
        lo = np.full(self.dim, -self.radius)
        hi = np.full(self.dim, self.radius)
        lo[-1], hi[-1] = 0.0, self.height
        return lo, hi

    def _anchor(self):
        y = np.zeros(self.dim)
        y[-1] = 0.5 * self.height
        return y


@dataclass(frozen=True, eq=False, kw_only=True)
class Polytope(ConvexBody):
    """
    Intersection of the open half-spaces <normals[i], y> < offsets[i];
    normals point outward.
    """
    normals: Optional[np.ndarray] = None
    offsets: Optional[np.ndarray] = None

    kind: ClassVar[str] = "polytope"

    def _setup(self):
        N = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if N.shape[1] != self.dim or len(b) != len(N):
            raise InvalidBody(f"{type(self).__name__}: normals and offsets disagree")
        norms = np.linalg.norm(N, axis=1)
        if np.any(norms == 0):
            raise InvalidBody(f"{type(self).__name__}: zero normal")
        self._set("normals", N)
        self._set("offsets", b)
        self._set("_norms", norms)

        # Chebyshev center with the radius capped at 1
        A = np.hstack([N, norms[:, None]])
        res = linprog(np.r_[np.zeros(self.dim), -1.0], A_ub=A, b_ub=b,
                      bounds=[(None, None)] * self.dim + [(None, 1.0)],
                      method="highs")
        if res.status != 0 or res.x[-1] <= 1e-12:
            raise InvalidBody(f"{type(self).__name__}: empty interior")
        self._set("_center", res.x[:-1])

        lo = np.empty(self.dim)
        hi = np.empty(self.dim)
        for k in range(self.dim):
            c = np.zeros(self.dim)
            c[k] = 1.0
            for sign, out in ((1.0, lo), (-1.0, hi)):
                r = linprog(sign * c, A_ub=N, b_ub=b,
                            bounds=[(None, None)] * self.dim, method="highs")
                out[k] = sign * r.fun if r.status == 0 else -sign * math.inf
        self._set("_box", (lo, hi))

    @property
    def params(self):
        return {"normals": self.normals.tolist(), "offsets": self.offsets.tolist()}

    @property
    def lineality_dim(self):
        return self.dim - int(np.linalg.matrix_rank(self.normals))

    def _slack(self, Y):
        return (self.offsets - Y @ self.normals.T) / self._norms

    def _level(self, Y):
        return -self._slack(Y).min(axis=1)

    def _depth(self, Y):
        return self._slack(Y).min(axis=1)

    def _exit(self, Y, W):
        s = self.offsets - Y @ self.normals.T
        r = W @ self.normals.T
        return _safe_div(s, r).min(axis=1)

    def _collar(self, Y):
        dist = self._slack(Y)
        which = dist.argmin(axis=1)
        n = len(Y)
        delta = dist[np.arange(n), which]
        if dist.shape[1] > 1:
            order = np.sort(dist, axis=1)
            ambiguous = order[:, 1] - order[:, 0] <= TIE_TOL
        else:
            ambiguous = np.zeros(n, dtype=bool)
        N = self.normals[which] / self._norms[which][:, None]
        return delta, Y + delta[:, None] * N, N, ambiguous

    def _normal(self, P):
        which = self._slack(P).argmin(axis=1)
        return self.normals[which] / self._norms[which][:, None]

    def _bbox(self):
        return self._box

    def _anchor(self):
        return self._center


@dataclass(frozen=True, eq=False, kw_only=True)
class HalfSpace(Polytope):
    """
    {<normal, y> < offset}; the default is {y1 > 0}.
    """
    normal: Optional[np.ndarray] = None
    offset: float = 0.0

    kind: ClassVar[str] = "halfspace"

    def _setup(self):
        normal = -np.eye(self.dim)[0] if self.normal is None else np.asarray(self.normal, float)
        self._set("normal", normal)
        self._set("normals", normal[None, :])
        self._set("offsets", np.array([float(self.offset)]))
        super()._setup()

    @property
    def params(self):
        return {"normal": self.normal.tolist(), "offset": self.offset}

    @property
    def flat_boundary_patch(self):
        n = self.normal / np.linalg.norm(self.normal)
        origin = self.offset / np.linalg.norm(self.normal) * n
        basis = np.linalg.svd(n[None, :])[2][1:3]
        return FlatPatch(self.to_world(origin[None])[0], self.dir_to_world(basis),
                         math.inf)


@dataclass(frozen=True, eq=False, kw_only=True)
class EuclideanFactor(ConvexBody):
    """
    All of R^k. Only valid as a factor of a Product.
    """
    factor: bool = True

    kind: ClassVar[str] = "full"

    def _setup(self):
        if not self.factor:
            raise InvalidBody("EuclideanFactor: only valid as a product factor")

    @property
    def lineality_dim(self):
        return self.dim

    def _level(self, Y):
        return np.full(len(Y), -math.inf)

    def _depth(self, Y):
        return np.full(len(Y), math.inf)

    def _exit(self, Y, W):
        return np.full(max(len(Y), len(W)), math.inf)

    def _collar(self, Y):
        n = len(Y)
        return np.full(n, math.inf), Y.copy(), np.zeros_like(Y), np.zeros(n, dtype=bool)

    def _normal(self, P):
        return np.zeros_like(P)

    def _bbox(self):
        return np.full(self.dim, -math.inf), np.full(self.dim, math.inf)

    def _anchor(self):
        return np.zeros(self.dim)


@dataclass(frozen=True, eq=False, kw_only=True)
class Product(ConvexBody):
    """
    Cartesian product; each factor owns a consecutive block of coordinates.
    """
    dim: int = 0
    factors: Tuple[ConvexBody, ...] = ()

    kind: ClassVar[str] = "product"

    def __post_init__(self):
        if not self.factors:
            raise InvalidBody("Product: needs at least one factor")
        total = sum(f.dim for f in self.factors)
        if self.dim not in (0, total):
            raise InvalidBody(f"Product: dim {self.dim} does not match factors ({total})")
        self._set("dim", total)
        self._set("factors", tuple(self.factors))
        super().__post_init__()

    def _setup(self):
        blocks = []
        start = 0
        for f in self.factors:
            blocks.append(slice(start, start + f.dim))
            start += f.dim
        self._set("_blocks", tuple(blocks))

    @property
    def params(self):
        return {"factors": [f"{f.kind}:{f.dim}" for f in self.factors]}

    @property
    def lineality_dim(self):
        return sum(f.lineality_dim for f in self.factors)

    @property
    def collar_epsilon(self):
        return min(f.collar_epsilon for f in self.factors)

    def _each(self, method, Y):
        return [getattr(f, method)(Y[:, blk]) for f, blk in zip(self.factors, self._blocks)]

    def _level(self, Y):
        return np.max(self._each("_level_w", Y), axis=0)

    def _depth(self, Y):
        return np.min(self._each("_depth_w", Y), axis=0)

    def _exit(self, Y, W):
        n = max(len(Y), len(W))
        t = np.full(n, math.inf)
        for f, blk in zip(self.factors, self._blocks):
            Wb = np.broadcast_to(W[:, blk], (n, f.dim))
            moving = np.any(Wb != 0, axis=1)
            if np.any(moving):
                Yb = np.broadcast_to(Y[:, blk], (n, f.dim))
                t[moving] = np.minimum(t[moving], f._exit_w(Yb[moving], Wb[moving]))
        return t

    def _collar(self, Y):
        parts = [f._collar_w(Y[:, blk]) for f, blk in zip(self.factors, self._blocks)]
        deltas = np.stack([p[0] for p in parts], axis=1)
        which = deltas.argmin(axis=1)
        n = len(Y)
        delta = deltas[np.arange(n), which]
        ambiguous = np.zeros(n, dtype=bool)
        if deltas.shape[1] > 1:
            order = np.sort(deltas, axis=1)
            ambiguous |= order[:, 1] - order[:, 0] <= TIE_TOL
        P = Y.copy()
        N = np.zeros_like(Y)
        for k, (blk, part) in enumerate(zip(self._blocks, parts)):
            rows = which == k
            P[rows, blk] = part[1][rows]
            N[rows, blk] = part[2][rows]
            ambiguous[rows] |= part[3][rows]
        return delta, P, N, ambiguous

    def _normal(self, P):
        levels = np.stack(self._each("_level_w", P), axis=1)
        which = levels.argmax(axis=1)
        N = np.zeros_like(P)
        for k, (f, blk) in enumerate(zip(self.factors, self._blocks)):
            rows = which == k
            if np.any(rows):
                N[rows, blk] = f._normal_w(P[rows][:, blk])
        return N

    def _bbox(self):
        boxes = [f._world_bbox() for f in self.factors]
        return (np.concatenate([b[0] for b in boxes]),
                np.concatenate([b[1] for b in boxes]))

    def _anchor(self):
        return np.concatenate([f.anchor for f in self.factors])


def random_polytope(rng: np.random.Generator, dim: int, faces: int) -> Polytope:
    """
    Returns a bounded polytope with outer normals uniform on the sphere and
    unit offsets, so it contains the unit ball
    """
    if faces <= dim:
        raise InvalidBody("Polytope: a bounded polytope needs more than dim faces")
    for _ in range(100):
        N = rng.normal(size=(faces, dim))
        N /= np.linalg.norm(N, axis=1)[:, None]
        body = Polytope(dim=dim, normals=N, offsets=np.ones(faces))
        if body.bounded:
            return body
        logger.debug("random polytope with %d faces unbounded, resampling", faces)
    raise InvalidBody("Polytope: could not draw a bounded polytope")


# domain-spec text format
SPEC_KEYS = ("kind", "dim", "radius", "center", "semi_axes", "halfspace",
             "height", "factors", "faces", "seed")


def _floats(value: str, key: str, lineno: int) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in value.replace(",", " ").split()])
    except ValueError:
        raise SpecParseError(f"BodySpec: line {lineno}: '{key}' needs numbers")


def _halfspace_row(value: str, lineno: int):
    if value.count(";") != 1:
        raise SpecParseError(f"BodySpec: line {lineno}: halfspace is 'n1 ... nd ; offset'")
    normal, offset = value.split(";")
    offset = _floats(offset, "halfspace", lineno)
    if len(offset) != 1:
        raise SpecParseError(f"BodySpec: line {lineno}: halfspace needs one offset")
    return _floats(normal, "halfspace", lineno), float(offset[0])


def _factor(token: str) -> ConvexBody:
    kind, _, dim = token.strip().partition(":")
    try:
        dim = int(dim)
    except ValueError:
        raise SpecParseError(f"BodySpec: factor '{token.strip()}' is not kind:dim")
    if kind == "full":
        return EuclideanFactor(dim=dim)
    if kind == "ball":
        return Ball(dim=dim, factor=True)
    if kind == "halfspace":
        return HalfSpace(dim=dim, factor=True)
    raise SpecParseError(f"BodySpec: unknown factor kind '{kind}'")


def parse_body_spec(text: str) -> ConvexBody:
    entries = {}
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(f"BodySpec: line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SPEC_KEYS:
            raise SpecParseError(f"BodySpec: unknown key '{key}'")
        if key == "halfspace":
            rows.append(_halfspace_row(value, lineno))
        elif key in entries:
            raise SpecParseError(f"BodySpec: duplicate key '{key}'")
        else:
            entries[key] = (value, lineno)

    if "kind" not in entries:
        raise SpecParseError("BodySpec: missing 'kind'")
    kind = entries["kind"][0]

    def number(key, default=None):
        if key not in entries:
            if default is None:
                raise SpecParseError(f"BodySpec: {kind} needs '{key}'")
            return default
        value = _floats(entries[key][0], key, entries[key][1])
        if len(value) != 1:
            raise SpecParseError(f"BodySpec: '{key}' takes one number")
        return float(value[0])

    def vector(key):
        return _floats(entries[key][0], key, entries[key][1]) if key in entries else None

    dim = int(number("dim", 0)) if "dim" in entries else None
    try:
        if kind == "product":
            if "factors" not in entries:
                raise SpecParseError("BodySpec: product needs 'factors'")
            factors = tuple(_factor(tok) for tok in entries["factors"][0].split(","))
            return Product(dim=dim or 0, factors=factors)
        if dim is None:
            raise SpecParseError(f"BodySpec: {kind} needs 'dim'")
        if kind == "ball":
            return Ball(dim=dim, radius=number("radius", 1.0), center=vector("center"))
        if kind == "ellipsoid":
            if "semi_axes" not in entries:
                raise SpecParseError("BodySpec: ellipsoid needs 'semi_axes'")
            return Ellipsoid(dim=dim, semi_axes=vector("semi_axes"), center=vector("center"))
        if kind == "cylinder":
            return Cylinder(dim=dim, radius=number("radius", 1.0),
                            height=number("height", 1.0))
        if kind == "halfspace":
            if len(rows) > 1:
                raise SpecParseError("BodySpec: halfspace takes one 'halfspace' row")
            if not rows:
                return HalfSpace(dim=dim)
            return HalfSpace(dim=dim, normal=rows[0][0], offset=rows[0][1])
        if kind == "polytope":
            if rows:
                return Polytope(dim=dim, normals=np.array([r[0] for r in rows]),
                                offsets=np.array([r[1] for r in rows]))
            rng = np.random.default_rng(int(number("seed", 0)))
            return random_polytope(rng, dim, int(number("faces")))
    except (InvalidBody, ValueError) as err:
        raise SpecParseError(f"BodySpec: {err}")
    raise SpecParseError(f"BodySpec: unknown kind '{kind}'")


def load_body_spec(path) -> ConvexBody:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise SpecParseError(f"BodySpec: cannot read {path}: {err}")
    return parse_body_spec(text)
