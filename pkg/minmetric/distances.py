"""
Intrinsic distances: curve lengths, roadmap-graph upper bounds, the Hilbert
cross-ratio distance, endpoint lower bounds, the boundary intrinsic
distance and the filling metric.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import trimesh
from scipy.optimize import minimize_scalar
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .config import map_threads
from .convex_body import ConvexBody, as_batch, as_pair, unbatch
from .errors import (
    DimensionMismatch,
    DisconnectedMesh,
    InconsistentReport,
    InvalidPolyline,
    SegmentExitsBody,
    UnboundedBody,
    UnknownMetric,
)
from .finsler_metrics import MetricEvaluator, MetricTag

logger = logging.getLogger(__name__)

GL_ORDER = 8
QUAD_RTOL = 1e-6
QUAD_DEPTH = 12
KNN = 12
COLLAR_LEVELS = 10
# every eighth unit of the node stream is a collar fibre
FIBRE_EVERY = 8
BASE_UNITS = 64
EDGE_CHUNK = 1 << 15

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True, eq=False)
class Polyline:
    points: np.ndarray
    params: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        params = np.asarray(self.params, dtype=float)
        if len(points) < 2:
            raise InvalidPolyline("Polyline: needs at least 2 points")
        if params.shape != (len(points),):
            raise InvalidPolyline("Polyline: one param per point")
        if np.any(np.diff(params) <= 0):
            raise InvalidPolyline("Polyline: params must increase strictly")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "params", params)

    @classmethod
    def through(cls, points) -> "Polyline":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(points, np.arange(len(points), dtype=float))

    def reversed(self) -> "Polyline":
        return Polyline(self.points[::-1], self.params[-1] + self.params[0] - self.params[::-1])


@dataclass(frozen=True, eq=False)
class DistanceReport:
    lower: float
    upper: float
    method: Tuple[str, ...]
    witness: Optional[Polyline] = None
    seconds: float = 0.0

    def __post_init__(self):
        if self.lower < 0:
            raise InconsistentReport("DistanceReport: negative lower bound")
        if self.lower > self.upper + 1e-9 * max(1.0, abs(self.upper)):
            raise InconsistentReport(
                f"DistanceReport: lower {self.lower!r} exceeds upper {self.upper!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def csv_row(self, x, y) -> list:
        return [" ".join(f"{c:.17g}" for c in x), " ".join(f"{c:.17g}" for c in y),
                f"{self.lower:.17g}", f"{self.upper:.17g}", "+".join(self.method),
                f"{self.seconds:.6f}"]


def _gauss(evaluator, A, B, lo, hi):
    s = lo[:, None] + (hi - lo)[:, None] * (0.5 * (_GL_NODES + 1.0))[None, :]
    D = B - A
    P = A[:, None, :] + s[:, :, None] * D[:, None, :]
    V = np.broadcast_to(D[:, None, :], P.shape)
    vals = np.asarray(evaluator(P.reshape(-1, A.shape[1]), V.reshape(-1, A.shape[1])))
    return 0.5 * (hi - lo) * (vals.reshape(len(A), GL_ORDER) @ _GL_WEIGHTS)


def segment_lengths(evaluator, A, B, max_depth: Optional[int] = None) -> np.ndarray:
    """
    Returns the evaluator lengths of the straight segments A[i] -> B[i].
    Gauss-Legendre on each segment, bisected while whole and split
    estimates differ by more than QUAD_RTOL. The plane-search upper bound
    gets a single bisection unless max_depth is given.
    """
    if max_depth is None:
        noisy = getattr(evaluator, "tag", None) is MetricTag.MINIMAL_UPPER
        max_depth = 0 if noisy else QUAD_DEPTH
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    total = np.zeros(len(A))
    idx = np.arange(len(A))
    lo = np.zeros(len(A))
    hi = np.ones(len(A))
    whole = _gauss(evaluator, A, B, lo, hi)
    for depth in range(max_depth + 1):
        if len(idx) == 0:
            break
        mid = 0.5 * (lo + hi)
        left = _gauss(evaluator, A[idx], B[idx], lo, mid)
        right = _gauss(evaluator, A[idx], B[idx], mid, hi)
        split = left + right
        done = np.abs(split - whole) <= QUAD_RTOL * np.maximum(np.abs(split), 1e-300)
        if depth == max_depth:
            done[:] = True
        np.add.at(total, idx[done], split[done])
        keep = ~done
        idx = np.concatenate([idx[keep], idx[keep]])
        lo, hi = (np.concatenate([lo[keep], mid[keep]]),
                  np.concatenate([mid[keep], hi[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
    return total


def segment_length(evaluator, a, b) -> float:
    return float(segment_lengths(evaluator, np.asarray(a)[None], np.asarray(b)[None])[0])


def curve_length(evaluator: MetricEvaluator, curve: Polyline) -> float:
    body = evaluator.body
    P, _ = as_batch(curve.points, body.dim, "CurveLength")
    if not np.all(body.interior_mask(P)):
        raise SegmentExitsBody("CurveLength: segment exits the body")
    return float(segment_lengths(evaluator, P[:-1], P[1:]).sum())


def _endpoint_terms(body, X, Y):
    # log terms of the two line endpoints beyond y and behind x
    W = Y - X
    moving = np.linalg.norm(W, axis=1) > 0
    beyond = np.zeros(len(W))
    behind = np.zeros(len(W))
    if np.any(moving):
        forward = body._exit_w(X[moving], W[moving])
        backward = body._exit_w(X[moving], -W[moving])
        beyond[moving] = -np.log1p(-1.0 / forward)
        behind[moving] = np.log1p(1.0 / backward)
    return beyond, behind


def hilbert_distance(body: ConvexBody, x, y):
    """
    Returns the Hilbert distance (1/2) log of the cross ratio of a, x, y, b;
    infinite endpoints drop out of the ratio
    """
    X, Y, single = as_pair(x, y, body.dim, "HilbertDistance")
    body.require_interior(np.vstack([X, Y]), "HilbertDistance")
    X, Y = np.broadcast_arrays(X, Y)
    beyond, behind = _endpoint_terms(body, X, Y)
    return unbatch(0.5 * (beyond + behind), single)


def minimal_distance_lower(body: ConvexBody, x, y):
    """
    Returns max over the finite line endpoints xi of (1/2)|log(|xi - x|/|xi - y|)|,
    together with half the Hilbert distance
    """
    X, Y, single = as_pair(x, y, body.dim, "MinimalLower")
    body.require_interior(np.vstack([X, Y]), "MinimalLower")
    X, Y = np.broadcast_arrays(X, Y)
    beyond, behind = _endpoint_terms(body, X, Y)
    out = np.maximum(np.maximum(0.5 * beyond, 0.5 * behind), 0.25 * (beyond + behind))
    return unbatch(out, single)


def lower_bound_for(evaluator: MetricEvaluator, x, y):
    tag = evaluator.tag
    if tag in (MetricTag.EXACT_MINIMAL, MetricTag.MINIMAL_UPPER):
        return minimal_distance_lower(evaluator.body, x, y)
    if tag is MetricTag.HILBERT:
        return hilbert_distance(evaluator.body, x, y)
    if tag is MetricTag.MODEL_F:
        return 0.0
    raise UnknownMetric(f"GeodesicGraph: '{tag.value}' lengths certify nothing")


def _require_certifying(evaluator):
    if evaluator.tag is MetricTag.MINIMAL_LOWER:
        raise UnknownMetric("GeodesicGraph: 'minimal_lower' lengths certify nothing")


def _fibre_levels(evaluator, body, levels, scale):
    top = min(body.collar_epsilon, scale)
    if evaluator.epsilon is not None:
        top = min(top, evaluator.epsilon)
    return top * 2.0 ** -np.arange(levels)


def _fibre(body, x, levels):
    _, P, N, _ = body._collar_w(x[None, :])
    nodes = P[0] - levels[:, None] * N[0]
    return nodes[body._level_w(nodes) < -1e-9]


def _node_stream(body, levels, budget, seed, box):
    """
    Returns (nodes, unit_ends) for the smallest power-of-two unit count
    reaching the budget. The sequence does not depend on the budget, so a
    larger budget yields a superset of nodes.
    """
    lo, hi = box
    engine = qmc.Sobol(d=body.dim, scramble=True, seed=seed)
    candidates = []
    have = 0
    units = []
    unit_ends = []
    count = 0
    u = BASE_UNITS
    while True:
        while have < u:
            # chunks double so the drawn total stays a power of two
            m = 12 if engine.num_generated == 0 else int(np.log2(engine.num_generated))
            X = body.to_world(lo + (hi - lo) * engine.random_base2(m))
            X = X[body._level_w(X) < -1e-9]
            candidates.append(X)
            have += len(X)
        pool = np.vstack(candidates)
        for k in range(len(units), u):
            p = pool[k]
            unit = _fibre(body, p, levels) if k % FIBRE_EVERY == FIBRE_EVERY - 1 else p[None]
            units.append(unit)
            count += len(unit)
            unit_ends.append(count)
        if count >= budget:
            return np.vstack(units), unit_ends
        u *= 2


def _knn_edges(points, k):
    if len(points) < 2:
        return np.empty((0, 2), dtype=np.int64)
    k = min(k, len(points) - 1)
    _, nbr = cKDTree(points).query(points, k=k + 1)
    i = np.repeat(np.arange(len(points)), k)
    j = nbr[:, 1:].ravel()
    return np.stack([np.minimum(i, j), np.maximum(i, j)], axis=1)


@dataclass(frozen=True, eq=False)
class GeodesicGraph:
    """
    Roadmap of interior samples and collar fibres with segment-length
    weights. Immutable once built; queries may run concurrently.
    """
    evaluator: MetricEvaluator
    nodes: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    levels: np.ndarray
    scales: Tuple[int, ...]
    knn: int = KNN
    trees: Tuple[cKDTree, ...] = field(init=False, repr=False)

    def __post_init__(self):
        # one tree per nested prefix of the node sequence
        object.__setattr__(self, "trees", tuple(cKDTree(self.nodes[:s]) for s in self.scales))

    @property
    def body(self) -> ConvexBody:
        return self.evaluator.body

    @classmethod
    def build(cls, evaluator: MetricEvaluator, budget: int, seed: int = 0,
              knn: int = KNN, collar_levels: int = COLLAR_LEVELS,
              window: Optional[Tuple[Sequence[float], float]] = None) -> "GeodesicGraph":
        """
        Builds the roadmap. Unbounded bodies need a window (world center,
        canonical half-width) to sample in.
        """
        body = evaluator.body
        _require_certifying(evaluator)
        lo, hi = body.bounding_box()
        if window is not None:
            center = body.to_canonical(np.asarray(window[0], dtype=float)[None])[0]
            lo = np.maximum(lo, center - window[1])
            hi = np.minimum(hi, center + window[1])
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedBody("GeodesicGraph: unbounded body needs a window")
        scale = float(0.5 * np.min(hi - lo))
        if window is None:
            scale = min(scale, float(body._depth_w(body.anchor[None])[0]))
        levels = _fibre_levels(evaluator, body, collar_levels, scale)

        nodes, unit_ends = _node_stream(body, levels, budget, seed, (lo, hi))
        scales = []
        units = BASE_UNITS
        while units <= len(unit_ends):
            scales.append(unit_ends[units - 1])
            units *= 2
        edges = [_knn_edges(nodes[:s], knn) for s in scales]
        edges = np.unique(np.vstack(edges), axis=0)
        edges = edges[edges[:, 0] != edges[:, 1]]

        chunks = [edges[s:s + EDGE_CHUNK] for s in range(0, len(edges), EDGE_CHUNK)]
        weights = np.concatenate(map_threads(
            lambda e: segment_lengths(evaluator, nodes[e[:, 0]], nodes[e[:, 1]]), chunks))
        logger.debug("roadmap: %d nodes, %d edges, %d levels", len(nodes), len(edges), len(levels))
        return cls(evaluator, nodes, edges, weights, levels, tuple(scales), knn)

    def node_distances(self, indices) -> np.ndarray:
        """
        Returns the shortest-path upper bounds between the given roadmap
        nodes, on the roadmap alone
        """
        indices = np.asarray(indices, dtype=int)
        n = len(self.nodes)
        data = np.maximum(self.weights, np.finfo(float).tiny)
        graph = coo_matrix((data, (self.edges[:, 0], self.edges[:, 1])), shape=(n, n)).tocsr()
        return dijkstra(graph, directed=False, indices=indices)[:, indices]

    def _query_nodes(self, x, y):
        Q = [x[None], y[None]]
        for p in (x, y):
            delta, _, _, _ = self.body._collar_w(p[None])
            if np.isfinite(delta[0]):
                Q.append(_fibre(self.body, p, self.levels))
        return np.vstack(Q)

    def query(self, x, y, relax: bool = False, mesh: "Optional[BoundaryMesh]" = None
              ) -> DistanceReport:
        start = time.perf_counter()
        body = self.body
        X, single = as_batch(x, body.dim, "GeodesicGraph")
        Y, _ = as_batch(y, body.dim, "GeodesicGraph")
        if not single or len(Y) != 1:
            raise DimensionMismatch("GeodesicGraph: query takes two points")
        body.require_interior(np.vstack([X, Y]), "GeodesicGraph")
        x, y = X[0], Y[0]
        if np.array_equal(x, y):
            return DistanceReport(0.0, 0.0, ("identity",), None, time.perf_counter() - start)

        n = len(self.nodes)
        Q = self._query_nodes(x, y)
        q = len(Q)
        links = []
        for size, tree in zip(self.scales, self.trees):
            k = min(self.knn, size)
            _, nbr = tree.query(Q, k=k)
            nbr = np.asarray(nbr).reshape(q, k)
            links.append(np.stack([np.repeat(np.arange(q), k), nbr.ravel()], axis=1))
        links = np.unique(np.vstack(links), axis=0)
        qi, qj = links[:, 0], links[:, 1]
        ii, jj = np.triu_indices(q, 1)
        A = np.vstack([Q[qi], Q[ii]])
        B = np.vstack([self.nodes[qj], Q[jj]])
        w = segment_lengths(self.evaluator, A, B)

        rows = np.concatenate([self.edges[:, 0], n + qi, n + ii])
        cols = np.concatenate([self.edges[:, 1], qj, n + jj])
        data = np.maximum(np.concatenate([self.weights, w]), np.finfo(float).tiny)
        graph = coo_matrix((data, (rows, cols)), shape=(n + q, n + q)).tocsr()
        dist, pred = dijkstra(graph, directed=False, indices=n, return_predecessors=True)

        upper = float(dist[n + 1])
        method = ["graph"]
        witness = None
        if np.isfinite(upper):
            path = [n + 1]
            while path[-1] != n:
                path.append(int(pred[path[-1]]))
            allpts = np.vstack([self.nodes, Q])
            witness = Polyline.through(allpts[path[::-1]])
            if len(path) == 2:
                method = ["segment"]
        else:
            logger.warning("GeodesicGraph: x and y not connected")

        if relax and witness is not None and len(witness.points) > 2:
            relaxed = relax_witness(self.evaluator, witness)
            length = curve_length(self.evaluator, relaxed)
            if length < upper:
                upper, witness, method = length, relaxed, ["relaxed"]

        if mesh is not None:
            try:
                length, path_curve = collar_path_length(body, mesh, self.evaluator, x, y)
            except (SegmentExitsBody, UnboundedBody) as err:
                logger.debug("collar path skipped: %s", err)
            else:
                if length < upper:
                    upper, witness, method = length, path_curve, ["collar-path"]

        lower = float(lower_bound_for(self.evaluator, x, y))
        if upper < lower <= upper + 1e-9 * max(1.0, upper):
            # quadrature noise on an exact witness
            lower = upper
        return DistanceReport(lower, upper, tuple(method), witness,
                              time.perf_counter() - start)


def geodesic_graph_distance(evaluator: MetricEvaluator, body: ConvexBody, x, y,
                            budget: int, seed: int = 0, knn: int = KNN,
                            collar_levels: int = COLLAR_LEVELS, relax: bool = False,
                            mesh: "Optional[BoundaryMesh]" = None) -> DistanceReport:
    """
    Returns an upper bound on the intrinsic distance by a shortest path in a
    roadmap graph, with the certified lower bound for the evaluator's tag
    """
    if evaluator.body is not body:
        raise UnknownMetric("GeodesicGraph: evaluator belongs to another body")
    _require_certifying(evaluator)
    X, _ = as_batch(x, body.dim, "GeodesicGraph")
    Y, _ = as_batch(y, body.dim, "GeodesicGraph")
    if np.array_equal(X, Y):
        body.require_interior(X, "GeodesicGraph")
        return DistanceReport(0.0, 0.0, ("identity",))
    window = None
    if not body.bounded:
        depth = body._depth_w(np.vstack([X, Y]))
        half = 2.0 * max(float(np.linalg.norm(X - Y)), float(np.max(depth)), 1e-3)
        window = (0.5 * (X[0] + Y[0]), half)
    graph = GeodesicGraph.build(evaluator, budget, seed, knn, collar_levels, window)
    return graph.query(X[0], Y[0], relax=relax, mesh=mesh)


def relax_witness(evaluator: MetricEvaluator, curve: Polyline, sweeps: int = 5) -> Polyline:
    """
    Returns the polyline after vertex-wise shortening: each interior vertex
    moves along the segment toward its neighbours' midpoint, which keeps it
    inside a convex body
    """
    P = curve.points.copy()
    for _ in range(sweeps):
        moved = False
        for i in range(1, len(P) - 1):
            a, p, b = P[i - 1], P[i].copy(), P[i + 1]
            target = 0.5 * (a + b)

            def local(s):
                q = (1.0 - s) * p + s * target
                return float(segment_lengths(evaluator, np.vstack([a, q]), np.vstack([q, b])).sum())

            res = minimize_scalar(local, bounds=(0.0, 1.0), method="bounded",
                                  options={"xatol": 1e-6})
            if res.fun < local(0.0):
                P[i] = (1.0 - res.x) * p + res.x * target
                moved = True
        if not moved:
            break
    return Polyline(P, curve.params)


@dataclass(eq=False)
class BoundaryMesh:
    """
    Edge graph of a triangulated boundary, with the body it lies on.
    """
    body: ConvexBody
    vertices: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    faces: Optional[np.ndarray] = None
    graph: nx.Graph = field(init=False, repr=False)
    tree: cKDTree = field(init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.edges = np.asarray(self.edges, dtype=np.int64)
        self.lengths = np.asarray(self.lengths, dtype=float)
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.vertices)))
        graph.add_weighted_edges_from(
            zip(self.edges[:, 0].tolist(), self.edges[:, 1].tolist(), self.lengths.tolist()),
            weight="length")
        self.graph = graph
        self.tree = cKDTree(self.vertices)

    @property
    def connected(self) -> bool:
        return nx.is_connected(self.graph)

    def snap(self, p) -> int:
        return int(self.tree.query(np.asarray(p, dtype=float))[1])

    def project(self, P) -> np.ndarray:
        """
        Returns P pushed onto the boundary along rays from the body anchor
        """
        anchor = self.body.anchor
        D = np.atleast_2d(P) - anchor
        t = self.body._exit_w(anchor[None, :], D)
        return anchor + t[:, None] * D


def build_boundary_mesh(body: ConvexBody, level: int = 3) -> BoundaryMesh:
    if body.dim != 3:
        raise DimensionMismatch("BoundaryMesh: icosphere meshes need dim = 3")
    if not body.bounded:
        raise UnboundedBody("BoundaryMesh: body is unbounded")
    sphere = trimesh.creation.icosphere(subdivisions=level)
    vertices = body.boundary_point(np.asarray(sphere.vertices)).point
    edges = np.asarray(sphere.edges_unique)
    lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
    mesh = BoundaryMesh(body, vertices, edges, lengths, np.asarray(sphere.faces))
    if not mesh.connected:
        raise DisconnectedMesh("BoundaryMesh: mesh graph is disconnected")
    logger.debug("boundary mesh level %d: %d vertices", level, len(vertices))
    return mesh


def boundary_path(mesh: BoundaryMesh, xi, eta, rounds: int = 3, sweeps: int = 60) -> np.ndarray:
    """
    Returns boundary points from xi to eta: the mesh Dijkstra path with the
    true endpoints, refined by upsampling and projected midpoint sweeps
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    i, j = mesh.snap(xi), mesh.snap(eta)
    if not nx.has_path(mesh.graph, i, j):
        raise DisconnectedMesh("BoundaryMesh: no path between the endpoints")
    nodes = nx.shortest_path(mesh.graph, i, j, weight="length")
    P = np.vstack([xi, mesh.vertices[nodes[1:-1]], eta]) if len(nodes) > 2 else np.vstack([xi, eta])
    for _ in range(rounds):
        mids = 0.5 * (P[:-1] + P[1:])
        up = np.empty((2 * len(P) - 1, P.shape[1]))
        up[0::2] = P
        up[1::2] = mesh.project(mids)
        P = up
        for _ in range(sweeps):
            P[1:-1] = mesh.project(0.5 * (P[:-2] + P[2:]))
    return P


def boundary_intrinsic_distance(mesh: BoundaryMesh, xi, eta, refine: bool = True) -> float:
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.allclose(xi, eta, rtol=0.0, atol=1e-12):
        return 0.0
    if not refine:
        i, j = mesh.snap(xi), mesh.snap(eta)
        if not nx.has_path(mesh.graph, i, j):
            raise DisconnectedMesh("BoundaryMesh: no path between the endpoints")
        return float(nx.shortest_path_length(mesh.graph, i, j, weight="length"))
    P = boundary_path(mesh, xi, eta)
    return float(np.linalg.norm(np.diff(P, axis=0), axis=1).sum())


def boundary_projection(body: ConvexBody, mesh: BoundaryMesh, x) -> np.ndarray:
    """
    Returns the nearest boundary point when it is unique, else the nearest
    mesh vertex
    """
    X, _ = as_batch(x, body.dim, "FillingDistance")
    delta, P, _, ambiguous = body.collar_frame(X)
    if not ambiguous[0] and delta[0] < body.collar_epsilon:
        return P[0]
    logger.warning("FillingDistance: projection not unique at %s, using nearest mesh vertex", X[0])
    return mesh.vertices[mesh.snap(X[0])]


def filling_distance(body: ConvexBody, mesh: BoundaryMesh, x, y) -> float:
    """
    Returns 2 log((H(pi(x), pi(y)) + max(h(x), h(y))) / sqrt(h(x) h(y))) with
    h = sqrt(delta)
    """
    X, _ = as_batch(x, body.dim, "FillingDistance")
    Y, _ = as_batch(y, body.dim, "FillingDistance")
    if np.array_equal(X, Y):
        return 0.0
    hx = math.sqrt(body.boundary_distance(X[0]))
    hy = math.sqrt(body.boundary_distance(Y[0]))
    H = boundary_intrinsic_distance(
        mesh, boundary_projection(body, mesh, X[0]), boundary_projection(body, mesh, Y[0]))
    return 2.0 * math.log((H + max(hx, hy)) / math.sqrt(hx * hy))


def collar_path_length(body: ConvexBody, mesh: BoundaryMesh, evaluator: MetricEvaluator,
                       x, y, depth: Optional[float] = None) -> Tuple[float, Polyline]:
    """
    Returns the length and polyline of the curve that rises from x along its
    normal fibre to depth, follows the lifted boundary path and descends to y.
    Without a depth the best one is searched for.
    """
    X, _ = as_batch(x, body.dim, "CollarPath")
    Y, _ = as_batch(y, body.dim, "CollarPath")
    x, y = X[0], Y[0]
    xi = boundary_projection(body, mesh, x)
    eta = boundary_projection(body, mesh, y)
    if np.allclose(xi, eta, rtol=0.0, atol=1e-12):
        curve = Polyline.through([x, y])
        return curve_length(evaluator, curve), curve
    P = boundary_path(mesh, xi, eta)
    N = body.normal_at(P)

    def curve_at(d):
        return Polyline.through(np.vstack([x, P - d * N, y]))

    def length_at(d):
        try:
            return curve_length(evaluator, curve_at(d))
        except SegmentExitsBody:
            return math.inf

    if depth is None:
        lo = max(body.boundary_distance(x), body.boundary_distance(y))
        hi = 0.95 * min(body.collar_epsilon, float(body._depth_w(body.anchor[None])[0]))
        if lo >= hi:
            depth = lo
        else:
            res = minimize_scalar(length_at, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-4 * hi})
            depth = float(res.x)
    curve = curve_at(depth)
    return curve_length(evaluator, curve), curve
