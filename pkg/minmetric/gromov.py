"""
Gromov-hyperbolicity diagnostics: Gromov products, four-point defects,
quasi-geodesic rays toward boundary points and the slimness of
quasi-geodesic triangles.
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, ClassVar, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from .config import map_threads
from .convex_body import THETA_SAMPLES, ConvexBody, Location, Polytope, as_batch
from .distances import (
    BoundaryMesh,
    DistanceReport,
    GeodesicGraph,
    Polyline,
    filling_distance,
    hilbert_distance,
    minimal_distance_lower,
    segment_lengths,
)
from .errors import (
    ApertureError,
    EndpointMismatch,
    InconsistentReport,
    NotOnBoundary,
    TriangleInequalityViolation,
)
from .finsler_metrics import PLANE_SAMPLES, make_evaluator, plane_clearance

logger = logging.getLogger(__name__)

TRIANGLE_TOL = 1e-6
CERTIFY_TOL = 1e-6
ENDPOINT_TOL = 1e-7
BOUNDARY_FRACTION = 0.75
BOUNDARY_LEVELS = 20
SAMPLES_PER_UNIT = 16

# pair order of the six distances of a quadruple (0, 1, 2, 3)
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def gromov_product_from(dxy: float, dxo: float, dyo: float, tol: float = TRIANGLE_TOL) -> float:
    """
    Returns (x|y)_o = (d(x,o) + d(y,o) - d(x,y)) / 2 from the three distances
    """
    values = (dxy, dxo, dyo)
    if not all(math.isfinite(d) and d >= -tol for d in values):
        raise TriangleInequalityViolation("GromovProduct: distances must be finite and >= 0", dxy)
    worst = max(dxy - dxo - dyo, dxo - dxy - dyo, dyo - dxy - dxo)
    if worst > tol:
        raise TriangleInequalityViolation(
            f"GromovProduct: triangle inequality fails by {worst:.3g}", worst)
    return max(0.0, 0.5 * (dxo + dyo - dxy))


def gromov_product(distance: Callable, x, y, o, tol: float = TRIANGLE_TOL) -> float:
    """
    Returns (x|y)_o for a distance function d(a, b)
    """
    return gromov_product_from(float(distance(x, y)), float(distance(x, o)),
                               float(distance(y, o)), tol)


def four_point_defects(D) -> np.ndarray:
    """
    Returns the four-point defect (largest - middle) / 2 of the three pair
    sums, for rows of six distances in PAIRS order
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    sums = np.stack([D[:, 0] + D[:, 5], D[:, 1] + D[:, 4], D[:, 2] + D[:, 3]], axis=1)
    sums.sort(axis=1)
    return 0.5 * (sums[:, 2] - sums[:, 1])


@dataclass(frozen=True, eq=False)
class QuadrupleSample:
    points: np.ndarray
    reports: Tuple[DistanceReport, ...]

    PAIRS: ClassVar = PAIRS

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if len(points) != 4:
            raise InconsistentReport("QuadrupleSample: needs four points")
        if len(self.reports) != 6:
            raise InconsistentReport("QuadrupleSample: needs six distances")
        if not all(math.isfinite(r.upper) for r in self.reports):
            raise InconsistentReport("QuadrupleSample: infinite distance")
        object.__setattr__(self, "points", points)

    @classmethod
    def exact(cls, points, distances) -> "QuadrupleSample":
        return cls(points, tuple(DistanceReport(float(d), float(d), ("exact",))
                                 for d in distances))

    def distance(self, i: int, j: int) -> DistanceReport:
        if i == j:
            return DistanceReport(0.0, 0.0, ("identity",))
        return self.reports[PAIRS.index((min(i, j), max(i, j)))]

    @property
    def distances(self) -> np.ndarray:
        return np.array([r.midpoint for r in self.reports])

    @property
    def widths(self) -> np.ndarray:
        return np.array([r.width for r in self.reports])

    @property
    def defect(self) -> float:
        return float(four_point_defects(self.distances)[0])


@dataclass(frozen=True, eq=False)
class HyperbolicityReport:
    delta_estimate: float
    worst_quadruple: QuadrupleSample
    sample_count: int
    distance_method: str
    uncertainty: float = 0.0

    def csv_row(self, seed: int) -> list:
        return [f"{self.delta_estimate:.17g}", str(self.sample_count), self.distance_method,
                str(seed), f"{self.uncertainty:.17g}"]

    def witness(self) -> dict:
        q = self.worst_quadruple
        return {
            "points": q.points.tolist(),
            "distances": q.distances.tolist(),
            "widths": q.widths.tolist(),
            "delta": self.delta_estimate,
        }


def four_point_delta(samples: Sequence[QuadrupleSample], method: Optional[str] = None
                     ) -> HyperbolicityReport:
    if len(samples) == 0:
        raise InconsistentReport("FourPoint: needs at least one sample")
    D = np.vstack([s.distances for s in samples])
    defects = four_point_defects(D)
    worst = int(np.argmax(defects))
    widths = max(float(s.widths.max()) for s in samples)
    if method is None:
        method = "+".join(samples[worst].reports[0].method)
    return HyperbolicityReport(float(defects[worst]), samples[worst], len(samples), method, widths)


def four_point_delta_from_arrays(points, lower, upper=None, method: str = "exact"
                                 ) -> HyperbolicityReport:
    """
    Returns the four-point report for (n, 4, d) quadruples with (n, 6)
    distance bounds; the estimate uses interval midpoints
    """
    points = np.asarray(points, dtype=float)
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    upper = lower if upper is None else np.atleast_2d(np.asarray(upper, dtype=float))
    if len(points) == 0:
        raise InconsistentReport("FourPoint: needs at least one sample")
    defects = four_point_defects(0.5 * (lower + upper))
    worst = int(np.argmax(defects))
    reports = tuple(DistanceReport(float(lo), float(hi), (method,))
                    for lo, hi in zip(lower[worst], upper[worst]))
    return HyperbolicityReport(float(defects[worst]), QuadrupleSample(points[worst], reports),
                               len(points), method, float(np.max(upper - lower)))


def sample_quadruples(body: ConvexBody, n: int, rng: np.random.Generator,
                      boundary_fraction: float = BOUNDARY_FRACTION,
                      levels: int = BOUNDARY_LEVELS) -> np.ndarray:
    """
    Returns (n, 4, d) quadruples. A boundary_fraction of them is drawn from
    the collar at depths 2^-k, k = 1..levels, the rest uniformly.
    """
    collar = rng.uniform(size=n) < boundary_fraction
    out = np.empty((n, 4, body.dim))
    k = int(collar.sum())
    depths = 2.0 ** -np.arange(1, levels + 1)
    depths = depths[depths < body.collar_epsilon] if np.isfinite(body.collar_epsilon) else depths
    if k:
        out[collar] = body.sample_collar(rng, 4 * k, depths).reshape(k, 4, body.dim)
    if n - k:
        out[~collar] = body.sample_interior(rng, 4 * (n - k)).reshape(n - k, 4, body.dim)
    return out


def quadruple_distances(body: ConvexBody, points, method: str = "hilbert",
                        graph: Optional[GeodesicGraph] = None):
    """
    Returns (lower, upper) arrays of shape (n, 6) for the pairs of each
    quadruple: "hilbert" is exact, "graph" uses roadmap queries
    """
    points = np.asarray(points, dtype=float)
    I = np.array([i for i, _ in PAIRS])
    J = np.array([j for _, j in PAIRS])
    X = points[:, I].reshape(-1, body.dim)
    Y = points[:, J].reshape(-1, body.dim)
    if method == "hilbert":
        d = np.asarray(hilbert_distance(body, X, Y)).reshape(-1, 6)
        return d, d
    if method == "graph":
        if graph is None:
            raise InconsistentReport("FourPoint: graph distances need a roadmap")
        reports = map_threads(lambda k: graph.query(X[k], Y[k]), range(len(X)))
        lower = np.array([r.lower for r in reports]).reshape(-1, 6)
        upper = np.array([r.upper for r in reports]).reshape(-1, 6)
        return lower, upper
    raise InconsistentReport(f"FourPoint: unknown distance method '{method}'")


def klein_quadruple_delta(body: ConvexBody, n: int, seed: int,
                          boundary_fraction: float = BOUNDARY_FRACTION) -> HyperbolicityReport:
    rng = np.random.default_rng(seed)
    points = sample_quadruples(body, n, rng, boundary_fraction)
    lower, upper = quadruple_distances(body, points, "hilbert")
    return four_point_delta_from_arrays(points, lower, upper, "hilbert")


def euclidean_square(scale: float = 1.0, dim: int = 2) -> QuadrupleSample:
    """
    Returns the corners of a square of side scale with Euclidean distances
    """
    corners = np.zeros((4, dim))
    corners[:, :2] = scale * np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    d = [np.linalg.norm(corners[i] - corners[j]) for i, j in PAIRS]
    return QuadrupleSample.exact(corners, d)


def standard_simplex(dim: int = 3) -> Polytope:
    """
    Returns the open simplex {y_i > 0, sum(y) < 1}, whose Hilbert geometry
    is isometric to a normed space
    """
    normals = np.vstack([-np.eye(dim), np.ones((1, dim))])
    return Polytope(dim=dim, normals=normals, offsets=np.r_[np.zeros(dim), 1.0])


def simplex_square(scale: float = 1.0, dim: int = 3) -> QuadrupleSample:
    """
    Returns the corners of a square of side scale in log-barycentric
    coordinates of the standard simplex, with Hilbert distances
    """
    body = standard_simplex(dim)
    Z = np.zeros((4, dim + 1))
    Z[:, 1:3] = scale * np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    corners = softmax(Z, axis=1)[:, 1:]
    i, j = np.array(PAIRS).T
    d = hilbert_distance(body, corners[i], corners[j])
    return QuadrupleSample.exact(corners, d)


def filling_four_point_delta(body: ConvexBody, mesh: BoundaryMesh, points) -> HyperbolicityReport:
    points = np.asarray(points, dtype=float)

    def row(quad):
        return [filling_distance(body, mesh, quad[i], quad[j]) for i, j in PAIRS]

    D = np.array(map_threads(row, list(points)))
    return four_point_delta_from_arrays(points, D, D, "filling")


@dataclass(frozen=True, eq=False)
class QuasiGeodesic:
    """
    Samples of sigma(t) = xi + exp(-2t)(p - xi) on [0, horizon] with its
    quasi-geodesic constants (A, B). segment_upper holds the certified upper
    lengths of consecutive pieces when the curve was certified.
    """
    polyline: Polyline
    constants: Tuple[float, float]
    horizon: float
    epsilon: float
    endpoint: np.ndarray
    segment_upper: Optional[np.ndarray] = None
    lower_violations: int = 0
    upper_violations: int = 0

    @property
    def points(self) -> np.ndarray:
        return self.polyline.points

    @property
    def params(self) -> np.ndarray:
        return self.polyline.params

    @property
    def start(self) -> np.ndarray:
        return self.polyline.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.polyline.points[-1]

    @property
    def certified(self) -> bool:
        return (self.segment_upper is not None and self.lower_violations == 0
                and self.upper_violations == 0)

    def reversed(self) -> "QuasiGeodesic":
        upper = None if self.segment_upper is None else self.segment_upper[::-1].copy()
        return QuasiGeodesic(self.polyline.reversed(), self.constants, self.horizon,
                             self.epsilon, self.endpoint, upper,
                             self.lower_violations, self.upper_violations)


def aperture(body: ConvexBody, p, xi, plane_samples: int = PLANE_SAMPLES,
             theta_samples: int = THETA_SAMPLES) -> float:
    """
    Returns the measured aperture clearance(p, xi - p) / |xi - p|
    """
    w = np.asarray(xi, dtype=float) - np.asarray(p, dtype=float)
    clearance = plane_clearance(body, p, w, plane_samples, theta_samples).value
    return clearance / float(np.linalg.norm(w))


def _certify(body, params, P, A, plane_samples, theta_samples):
    upper_eval = make_evaluator("minimal_upper", body, plane_samples=plane_samples,
                                theta_samples=theta_samples)
    U = segment_lengths(upper_eval, P[:-1], P[1:])
    cumulative = np.concatenate([[0.0], np.cumsum(U)])
    i, j = np.triu_indices(len(P), 1)
    gap = params[j] - params[i]
    lower = np.asarray(minimal_distance_lower(body, P[i], P[j]))
    upper = cumulative[j] - cumulative[i]
    lower_bad = int(np.sum(lower < gap - CERTIFY_TOL))
    upper_bad = int(np.sum(upper > A * gap + CERTIFY_TOL))
    if lower_bad or upper_bad:
        logger.warning("quasi-geodesic: %d lower and %d upper violations", lower_bad, upper_bad)
    return U, lower_bad, upper_bad


def _certified(body, side, plane_samples, theta_samples):
    U, lower_bad, upper_bad = _certify(body, side.params, side.points, side.constants[0],
                                       plane_samples, theta_samples)
    return dataclasses.replace(side, segment_upper=U, lower_violations=lower_bad,
                               upper_violations=upper_bad)


def build_quasi_geodesic(body: ConvexBody, p, xi, epsilon: Optional[float] = None,
                         horizon: float = 1.0, n: int = 17, certify: bool = True,
                         plane_samples: int = PLANE_SAMPLES,
                         theta_samples: int = THETA_SAMPLES) -> QuasiGeodesic:
    """
    Samples sigma(t) = xi + exp(-2t)(p - xi) at n uniform parameters on
    [0, horizon], with constants (2 / epsilon, 0).

    The aperture is measured with the plane search. Without an epsilon the
    measured one is used; when the measurement falls below the requested
    epsilon the constants are recomputed from the measurement.
    """
    P0, _ = as_batch(p, body.dim, "QuasiGeodesic")
    Xi, _ = as_batch(xi, body.dim, "QuasiGeodesic")
    p, xi = P0[0], Xi[0]
    body.require_interior(P0, "QuasiGeodesic")
    if body.contains(xi) is not Location.BOUNDARY:
        raise NotOnBoundary("QuasiGeodesic: xi is not a boundary point")
    if not horizon > 0 or n < 2:
        raise ApertureError("QuasiGeodesic: needs horizon > 0 and n >= 2")

    measured = aperture(body, p, xi, plane_samples, theta_samples)
    if not measured > 0:
        raise ApertureError("QuasiGeodesic: aperture at p is zero")
    if epsilon is None:
        epsilon = measured
    elif measured < epsilon * (1.0 - 1e-9):
        logger.warning("QuasiGeodesic: aperture %.6g below requested %.6g, using it",
                       measured, epsilon)
        epsilon = measured
    A = 2.0 / epsilon

    t = np.linspace(0.0, horizon, n)
    P = xi + np.exp(-2.0 * t)[:, None] * (p - xi)
    side = QuasiGeodesic(Polyline(P, t), (A, 0.0), float(horizon), float(epsilon), xi)
    return _certified(body, side, plane_samples, theta_samples) if certify else side


def segment_quasi_geodesic(body: ConvexBody, a, b, density: int = SAMPLES_PER_UNIT,
                           certify: bool = True, plane_samples: int = PLANE_SAMPLES,
                           theta_samples: int = THETA_SAMPLES) -> QuasiGeodesic:
    """
    Returns the segment [a, b] parametrised as the quasi-geodesic from a
    toward the boundary point beyond b
    """
    A, _ = as_batch(a, body.dim, "SegmentQuasiGeodesic")
    B, _ = as_batch(b, body.dim, "SegmentQuasiGeodesic")
    a, b = A[0], B[0]
    w = b - a
    t_plus = float(body._exit_w(a[None], w[None])[0])
    if not math.isfinite(t_plus) or t_plus <= 1.0:
        raise ApertureError("SegmentQuasiGeodesic: no boundary point beyond b")
    xi = a + t_plus * w
    horizon = 0.5 * math.log(t_plus / (t_plus - 1.0))
    n = max(2, int(math.ceil(density * horizon)) + 1)
    side = build_quasi_geodesic(body, a, xi, None, horizon, n, False,
                                plane_samples, theta_samples)
    # exp(-2 horizon) rounding leaves the last sample next to b
    side.polyline.points[-1] = b
    return _certified(body, side, plane_samples, theta_samples) if certify else side


def fat_triangle(body: ConvexBody, p, xi, eta, horizon: float,
                 density: int = SAMPLES_PER_UNIT, certify: bool = True,
                 plane_samples: int = PLANE_SAMPLES, theta_samples: int = THETA_SAMPLES
                 ) -> Tuple[QuasiGeodesic, QuasiGeodesic, QuasiGeodesic]:
    """
    Returns the sides p -> gamma(T), gamma(T) -> sigma(T), sigma(T) -> p of
    the triangle spanned by the rays toward xi and eta
    """
    n = max(2, int(math.ceil(density * horizon)) + 1)
    gamma = build_quasi_geodesic(body, p, xi, None, horizon, n, certify,
                                 plane_samples, theta_samples)
    sigma = build_quasi_geodesic(body, p, eta, None, horizon, n, certify,
                                 plane_samples, theta_samples)
    across = segment_quasi_geodesic(body, gamma.end, sigma.end, density, certify,
                                    plane_samples, theta_samples)
    return gamma, across, sigma.reversed()


def _check_endpoints(sides):
    ends = [(s.points[0], s.points[-1]) for s in sides]
    for i, pair in enumerate(ends):
        others = [e for j, other in enumerate(ends) if j != i for e in other]
        for e in pair:
            gap = min(float(np.linalg.norm(e - o)) for o in others)
            if gap > ENDPOINT_TOL * max(1.0, float(np.linalg.norm(e))):
                raise EndpointMismatch("TriangleSlimness: sides do not share endpoints")


def _probe_indices(count: int, probes: Optional[int]) -> np.ndarray:
    if probes is None or probes >= count:
        return np.arange(count)
    return np.unique(np.linspace(0, count - 1, probes).round().astype(int))


def triangle_slimness(sides: Sequence[QuasiGeodesic], distance: Callable,
                      probes: Optional[int] = None) -> float:
    """
    Returns a certified lower bound for the slimness constant: the max over
    probe points of each side of the distance lower bound to the other two.

    Where a target side carries certified piece lengths U_j, every point
    between its samples q_j and q_j+1 is at least
    (l(p, q_j) + l(p, q_j+1) - U_j) / 2 away; otherwise only the samples
    themselves are compared.
    """
    if len(sides) != 3:
        raise EndpointMismatch("TriangleSlimness: needs three sides")
    _check_endpoints(sides)
    best = 0.0
    for i, side in enumerate(sides):
        probe = side.points[_probe_indices(len(side.points), probes)]
        nearest = np.full(len(probe), math.inf)
        for j, target in enumerate(sides):
            if j == i:
                continue
            Q = target.points
            m, k = len(probe), len(Q)
            L = np.asarray(distance(np.repeat(probe, k, axis=0), np.tile(Q, (m, 1))))
            L = L.reshape(m, k)
            if target.segment_upper is None:
                bound = L.min(axis=1)
            else:
                gaps = 0.5 * (L[:, :-1] + L[:, 1:] - target.segment_upper[None, :])
                bound = np.clip(gaps, 0.0, None).min(axis=1)
            nearest = np.minimum(nearest, bound)
        best = max(best, float(nearest.max()))
    return best


def lower_distance(body: ConvexBody) -> Callable:
    return lambda X, Y: minimal_distance_lower(body, X, Y)
