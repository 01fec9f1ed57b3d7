"""
Static registry of the reproduction scenarios.

Each scenario names the statement it checks, carries its assertion
thresholds (written into the report header) and a runner returning the
list of failed assertions.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np

from .config import LabConfig, map_threads
from .convex_body import (
    Ball,
    ConvexBody,
    Cylinder,
    Ellipsoid,
    HalfSpace,
    load_body_spec,
    parse_body_spec,
    random_polytope,
)
from .distances import GeodesicGraph, build_boundary_mesh, filling_distance
from .errors import ConfigError, UnknownScenario
from .finsler_metrics import (
    ball_minimal,
    estball_bound,
    exact_minimal,
    halfspace_minimal,
    hilbert_metric,
    make_evaluator,
    minimal_lower_directional,
    minimal_upper,
    model_F,
    sharp_constant_ratio,
)
from .gromov import (
    build_quasi_geodesic,
    euclidean_square,
    fat_triangle,
    filling_four_point_delta,
    four_point_delta_from_arrays,
    lower_distance,
    quadruple_distances,
    sample_quadruples,
    simplex_square,
    triangle_slimness,
)
from .reports import ReportWriter

logger = logging.getLogger(__name__)

# plane grid of the sandwich checks; any grid gives a valid upper bound
COARSE_PLANES = 32
COARSE_THETA = 64
# certification grid of the quasi-geodesic scenarios
CERTIFY_PLANES = 128
CERTIFY_THETA = 128


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    seed: int = 20240607
    body: Optional[str] = None
    graph_nodes: int = 20000
    quadruples: int = 100000
    samples: int = 10000
    mesh_level: int = 3
    plane_samples: int = 512
    theta_samples: int = 256
    knn: int = 12
    collar_levels: int = 10
    output: str = "reports"

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise UnknownScenario(f"Scenario: unknown scenario '{self.name}'")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("Scenario: seed must be a 64-bit unsigned integer")
        for key in ("graph_nodes", "quadruples", "samples", "mesh_level", "plane_samples",
                    "theta_samples", "knn", "collar_levels"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"Scenario: {key} must be positive")

    @classmethod
    def from_lab(cls, name: str, lab: LabConfig, body: Optional[str] = None,
                 output: Optional[str] = None) -> "ScenarioConfig":
        fields = {k: v for k, v in asdict(lab).items() if k != "threads"}
        if output is not None:
            fields["output"] = output
        return cls(name=name, body=body, **fields)

    def load_body(self) -> Optional[ConvexBody]:
        return None if self.body is None else load_body_spec(self.body)

    def budgets(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in ("name", "body", "output")}


@dataclass(frozen=True)
class Scenario:
    name: str
    statement: str
    thresholds: Mapping[str, float]
    columns: tuple
    runner: Callable = field(repr=False)


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    passed: bool
    failures: List[str]
    paths: List[Path]


SCENARIOS: Dict[str, Scenario] = {}


def scenario(name: str, statement: str, columns: tuple, **thresholds):
    def register(runner):
        SCENARIOS[name] = Scenario(name, statement, dict(thresholds), columns, runner)
        return runner
    return register


def _mixed_points(body, rng, n, deepest=10):
    # half uniform, half at dyadic depths
    k = n // 2
    depths = 2.0 ** -np.arange(1, deepest + 1)
    depths = depths[depths < body.collar_epsilon]
    return np.vstack([body.sample_interior(rng, n - k), body.sample_collar(rng, k, depths)])


def _halfspace_points(rng, n):
    X = rng.normal(scale=3.0, size=(n, 3))
    X[:, 0] = 10.0 ** rng.uniform(-3.0, 1.0, size=n)
    return X


def _default_bodies(config, rng):
    given = config.load_body()
    if given is not None:
        return [(given.kind, given)]
    return [
        ("ellipsoid", Ellipsoid(dim=3, semi_axes=np.array([1.0, 0.7, 0.5]))),
        ("cylinder", Cylinder(dim=3)),
        ("polytope", random_polytope(rng, 3, 20)),
    ]


def klein_distance(x, y):
    """
    Returns the hyperbolic distance of the Klein model of the unit ball
    """
    x, y = np.atleast_2d(x), np.atleast_2d(y)
    num = 1.0 - np.sum(x * y, axis=1)
    den = np.sqrt((1.0 - np.sum(x * x, axis=1)) * (1.0 - np.sum(y * y, axis=1)))
    return np.arccosh(np.maximum(num / den, 1.0))


@scenario("ball-metric-equality",
          "the minimal and Hilbert metrics coincide on the unit ball",
          ("quantity", "value"), max_abs_diff=1e-8)
def _ball_equality(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = Ball(dim=3)
    X = _mixed_points(body, rng, config.samples)
    V = rng.normal(size=X.shape)
    diff = np.abs(ball_minimal(X, V) - hilbert_metric(body, X, V))
    worst = int(np.argmax(diff))
    report.row("samples", len(X))
    report.row("max_abs_diff", float(diff[worst]))
    report.record(kind="worst", x=X[worst], v=V[worst], diff=float(diff[worst]))
    if diff[worst] >= thresholds["max_abs_diff"]:
        return [f"ball-metric-equality: max |g - h| = {diff[worst]:.3g}"]
    return []


@scenario("halfspace-equality",
          "the minimal and Hilbert metrics coincide on the half-space",
          ("quantity", "value"), max_abs_diff=1e-10)
def _halfspace_equality(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = HalfSpace(dim=3, normal=np.array([-1.0, 0.0, 0.0]))
    X = _halfspace_points(rng, config.samples)
    V = rng.normal(size=X.shape)
    diff = np.abs(halfspace_minimal(X, V) - hilbert_metric(body, X, V))
    worst = int(np.argmax(diff))
    report.row("samples", len(X))
    report.row("max_abs_diff", float(diff[worst]))
    report.record(kind="worst", x=X[worst], v=V[worst], diff=float(diff[worst]))
    if diff[worst] >= thresholds["max_abs_diff"]:
        return [f"halfspace-equality: max |g - h| = {diff[worst]:.3g}"]
    return []


@scenario("product-degeneracy",
          "R x B2 has a degenerate Hilbert metric along its line yet contains no 2-flat",
          ("quantity", "value"), hilbert_along_line=0.0)
def _product_degeneracy(config, thresholds, report):
    body = parse_body_spec("kind = product\nfactors = full:1, ball:2\n")
    p = body.anchor
    e1 = np.eye(body.dim)[0]
    along = float(hilbert_metric(body, p, e1))
    across = float(hilbert_metric(body, p, np.eye(body.dim)[1]))
    report.row("hilbert_along_line", along)
    report.row("hilbert_across", across)
    report.row("lineality_dim", body.lineality_dim)
    report.row("contains_two_flat", body.contains_two_flat)
    failures = []
    if along != thresholds["hilbert_along_line"]:
        failures.append(f"product-degeneracy: h(p, e1) = {along!r}")
    if body.contains_two_flat:
        failures.append("product-degeneracy: body reports a 2-flat")
    if not across > 0:
        failures.append("product-degeneracy: h(p, e2) is not positive")
    return failures


@scenario("sandwich-bounds",
          "half the Hilbert metric <= minimal metric <= |v| / planar clearance",
          ("body", "check", "samples", "violations", "worst"),
          slack=1e-9, tangential_rel_err=0.01, tangential_samples=1000)
def _sandwich(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    slack = thresholds["slack"]
    failures = []
    ball = Ball(dim=3)
    cases = [("ball", ball, _mixed_points(ball, rng, config.samples)),
             ("halfspace", HalfSpace(dim=3), _halfspace_points(rng, config.samples))]
    for name, body, X in cases:
        V = rng.normal(size=X.shape)
        lower = minimal_lower_directional(body, X, V)
        exact = exact_minimal(body, X, V)
        upper = minimal_upper(body, X, V, COARSE_PLANES, COARSE_THETA)
        tol = slack * np.maximum(1.0, exact)
        for check, gap in (("lower<=exact", lower - exact), ("exact<=upper", exact - upper)):
            bad = int(np.sum(gap > tol))
            report.row(name, check, len(X), bad, float(gap.max()))
            if bad:
                failures.append(f"sandwich-bounds: {name} {check} fails at {bad} samples")

    m = min(config.samples, int(thresholds["tangential_samples"]))
    X = _mixed_points(ball, rng, m)
    V = rng.normal(size=X.shape)
    r2 = np.sum(X * X, axis=1)
    V -= (np.sum(X * V, axis=1) / np.where(r2 > 0, r2, 1.0))[:, None] * X
    exact = exact_minimal(ball, X, V)
    upper = minimal_upper(ball, X, V, config.plane_samples, config.theta_samples)
    rel = np.abs(upper / exact - 1.0)
    bad = int(np.sum(rel > thresholds["tangential_rel_err"]))
    report.row("ball", "tangential-within-1%", m, bad, float(rel.max()))
    if bad:
        failures.append(f"sandwich-bounds: tangential upper off by > 1% at {bad} samples")
    return failures


@scenario("hilbert-vs-minimal",
          "the Hilbert metric is at most twice the minimal metric on any convex body",
          ("body", "samples", "violations", "max_ratio"), slack=1e-9)
def _hilbert_vs_minimal(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    failures = []
    for name, body in _default_bodies(config, rng):
        X = _mixed_points(body, rng, config.samples)
        V = rng.normal(size=X.shape)
        h = hilbert_metric(body, X, V)
        upper = minimal_upper(body, X, V, COARSE_PLANES, COARSE_THETA)
        bad = int(np.sum(h > 2.0 * upper + thresholds["slack"] * np.maximum(1.0, h)))
        ratio = float(np.max(h / np.maximum(upper, 1e-300)))
        report.row(name, len(X), bad, ratio)
        if bad:
            failures.append(f"hilbert-vs-minimal: {name} fails at {bad} samples")
    return failures


@scenario("collar-estimate",
          "the collar model is comparable to the minimal metric near the boundary",
          ("quantity", "value"), ratio_min=0.25, ratio_max=4.0, depth_max=0.1, epsilon=0.5)
def _collar_estimate(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = Ball(dim=3)
    depths = 0.99 * thresholds["depth_max"] * 2.0 ** -np.arange(13)
    X = body.sample_collar(rng, config.samples, depths)
    V = rng.normal(size=X.shape)
    g = ball_minimal(X, V)
    ratio = g / model_F(body, X, V, thresholds["epsilon"])
    above = int(np.sum(g > estball_bound(X, V) * (1.0 + 1e-12)))
    report.row("samples", len(X))
    report.row("ratio_min", float(ratio.min()))
    report.row("ratio_max", float(ratio.max()))
    report.row("estball_violations", above)
    failures = []
    if ratio.min() < thresholds["ratio_min"] or ratio.max() > thresholds["ratio_max"]:
        failures.append(f"collar-estimate: ratio range [{ratio.min():.4g}, {ratio.max():.4g}]")
    if above:
        failures.append(f"collar-estimate: ball estimate exceeded at {above} samples")
    return failures


@scenario("graph-fidelity",
          "roadmap upper distances reproduce the Klein distance on the unit ball",
          ("x", "y", "lower", "upper", "oracle", "rel_err", "method"),
          rel_err=0.02, pairs=50, distance_min=0.5, distance_max=4.0)
def _graph_fidelity(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = Ball(dim=3)
    pairs = []
    while len(pairs) < thresholds["pairs"]:
        X = _mixed_points(body, rng, 64)
        d = klein_distance(X[0::2], X[1::2])
        keep = (d >= thresholds["distance_min"]) & (d <= thresholds["distance_max"])
        pairs.extend(zip(X[0::2][keep], X[1::2][keep], d[keep]))
    pairs = pairs[:int(thresholds["pairs"])]

    start = time.perf_counter()
    graph = GeodesicGraph.build(make_evaluator("exact_minimal", body), config.graph_nodes,
                                config.seed, config.knn, config.collar_levels)
    report.timing("build", time.perf_counter() - start)
    results = map_threads(lambda pair: graph.query(pair[0], pair[1]), pairs)
    failures = []
    for (x, y, oracle), res in zip(pairs, results):
        rel = abs(res.upper - oracle) / oracle
        report.row(x, y, res.lower, res.upper, float(oracle), rel, "+".join(res.method))
        report.timing("query", res.seconds)
        if rel > thresholds["rel_err"] or res.lower > oracle * (1.0 + 1e-9):
            failures.append(f"graph-fidelity: {rel:.4g} relative error at distance {oracle:.4g}")
    return failures


@scenario("filling-vs-graph",
          "the filling metric stays within bounded distance of the collar-model distance",
          ("delta", "graph_lower", "graph_upper", "filling", "gap", "method"),
          gap_max=3.0, deep_min=6.0, window_min=2.0, window_max=8.0, epsilon=0.5, deepest=12)
def _filling_vs_graph(config, thresholds, report):
    body = Ball(dim=3)
    mesh = build_boundary_mesh(body, config.mesh_level)
    evaluator = make_evaluator("model_F", body, epsilon=thresholds["epsilon"])
    graph = GeodesicGraph.build(evaluator, config.graph_nodes, config.seed, config.knn,
                                config.collar_levels)
    xi, eta = np.eye(3)[0], np.eye(3)[1]
    in_window = []
    failures = []
    for k in range(2, int(thresholds["deepest"]) + 1):
        delta = 2.0 ** -k
        x, y = (1.0 - delta) * xi, (1.0 - delta) * eta
        res = graph.query(x, y, mesh=mesh)
        d_h = filling_distance(body, mesh, x, y)
        gap = abs(res.upper - d_h)
        report.row(delta, res.lower, res.upper, d_h, gap, "+".join(res.method))
        report.timing(f"query-{k}", res.seconds)
        if thresholds["window_min"] <= res.upper <= thresholds["window_max"]:
            in_window.append((res.upper, d_h, gap))
    if not in_window:
        return ["filling-vs-graph: no pair with graph distance in the window"]
    for upper, d_h, gap in in_window:
        if gap > thresholds["gap_max"]:
            failures.append(f"filling-vs-graph: gap {gap:.4g} at graph distance {upper:.4g}")
    upper, d_h, _ = in_window[-1]
    if not (upper > thresholds["deep_min"] and d_h > thresholds["deep_min"]):
        failures.append(f"filling-vs-graph: deepest pair only reaches {upper:.4g}, {d_h:.4g}")
    return failures


@scenario("delta-contrast",
          "Klein quadruples stay boundedly hyperbolic while squares in the flat simplex geometry grow linearly",
          ("kind", "delta_estimate", "n_samples", "method", "seed", "uncertainty", "scale"),
          growth_max=0.10, doubling_ratio=2.0, ratio_tol=0.05, corner_tol=1e-12)
def _delta_contrast(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = Ball(dim=3)
    total = config.quadruples
    sizes = sorted({max(1, total // 100), max(1, total // 10), total})
    points = sample_quadruples(body, total, rng)
    lower, upper = quadruple_distances(body, points, "hilbert")
    estimates = []
    for n in sizes:
        rep = four_point_delta_from_arrays(points[:n], lower[:n], upper[:n], "hilbert")
        estimates.append(rep.delta_estimate)
        report.row("klein", *rep.csv_row(config.seed), "")
    report.record(kind="klein-witness", **rep.witness())

    failures = []
    growth = estimates[-1] / estimates[0] - 1.0
    if growth >= thresholds["growth_max"]:
        failures.append(f"delta-contrast: Klein estimate grew by {growth:.3%}")

    unit = euclidean_square(1.0).defect
    report.row("euclidean", unit, 1, "exact", config.seed, 0.0, 1.0)
    if abs(unit - (math.sqrt(2.0) - 1.0)) > thresholds["corner_tol"]:
        failures.append(f"delta-contrast: unit square defect {unit!r}")

    # squares in the simplex, whose Hilbert geometry is flat
    flat = []
    for s in (1.0, 2.0, 4.0):
        square = simplex_square(s)
        flat.append(square.defect)
        report.row("simplex", square.defect, 1, "hilbert", config.seed, 0.0, s)
    if not flat[0] > 0.0:
        failures.append(f"delta-contrast: simplex square defect {flat[0]!r}")
    for a, b in zip(flat, flat[1:]):
        ratio = b / a
        if abs(ratio - thresholds["doubling_ratio"]) > thresholds["ratio_tol"] * thresholds["doubling_ratio"]:
            failures.append(f"delta-contrast: doubling ratio {ratio:.4g}")
    return failures


@scenario("fat-triangles-flat-face",
          "quasi-geodesic triangles toward a flat boundary face are not uniformly thin",
          ("horizon", "slimness_lower", "epsilon_gamma", "epsilon_sigma", "certified"),
          min_increase=0.5, samples_per_unit=16)
def _fat_triangles(config, thresholds, report):
    body = Cylinder(dim=3)
    p = np.array([0.0, 0.0, 0.5])
    xi = np.array([0.0, 0.0, 1.0])
    eta = np.array([1.0, 0.0, 1.0])
    planes = min(config.plane_samples, CERTIFY_PLANES)
    theta = min(config.theta_samples, CERTIFY_THETA)
    slimness = []
    for horizon in (2.0, 3.0, 4.0):
        start = time.perf_counter()
        sides = fat_triangle(body, p, xi, eta, horizon, int(thresholds["samples_per_unit"]),
                             True, planes, theta)
        m = triangle_slimness(sides, lower_distance(body))
        slimness.append(m)
        certified = all(side.certified for side in sides)
        report.row(horizon, m, sides[0].epsilon, sides[2].epsilon, certified)
        report.timing(f"horizon-{horizon:g}", time.perf_counter() - start)
    failures = []
    if not all(b > a for a, b in zip(slimness, slimness[1:])):
        failures.append(f"fat-triangles-flat-face: slimness not increasing {slimness}")
    if slimness[-1] < slimness[0] + thresholds["min_increase"]:
        failures.append(f"fat-triangles-flat-face: slimness grew by {slimness[-1] - slimness[0]:.4g}")
    return failures


@scenario("quasi-geodesic-certification",
          "rays toward boundary points are (2/eps, 0) quasi-geodesics",
          ("case", "epsilon", "A", "pairs", "lower_violations", "upper_violations"),
          horizon=2.0, samples=33, tolerance=1e-6)
def _quasi_geodesics(config, thresholds, report):
    cylinder = Cylinder(dim=3)
    cases = [
        ("ball-center-e1", Ball(dim=3), np.zeros(3), np.eye(3)[0], 1.0),
        ("cylinder-face", cylinder, np.array([0.0, 0.0, 0.5]), np.array([0.0, 0.0, 1.0]), None),
        ("cylinder-edge", cylinder, np.array([0.0, 0.0, 0.5]), np.array([1.0, 0.0, 1.0]), None),
    ]
    n = int(thresholds["samples"])
    planes = min(config.plane_samples, CERTIFY_PLANES)
    theta = min(config.theta_samples, CERTIFY_THETA)
    failures = []
    for name, body, p, xi, epsilon in cases:
        side = build_quasi_geodesic(body, p, xi, epsilon, thresholds["horizon"], n, True,
                                    planes, theta)
        report.row(name, side.epsilon, side.constants[0], n * (n - 1) // 2,
                   side.lower_violations, side.upper_violations)
        if not side.certified:
            failures.append(f"quasi-geodesic-certification: {name} has "
                            f"{side.lower_violations + side.upper_violations} violations")
    return failures


@scenario("filling-four-point",
          "the filling metric is 2 log 2 hyperbolic",
          ("delta_estimate", "n_samples", "method", "seed", "uncertainty"),
          delta_max=2.0 * math.log(2.0), tolerance=1e-3, quadruples=200)
def _filling_four_point(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    body = Ball(dim=3)
    mesh = build_boundary_mesh(body, config.mesh_level)
    n = min(config.quadruples, int(thresholds["quadruples"]))
    points = sample_quadruples(body, n, rng, boundary_fraction=1.0)
    rep = filling_four_point_delta(body, mesh, points)
    report.row(*rep.csv_row(config.seed))
    report.record(kind="witness", **rep.witness())
    if rep.delta_estimate > thresholds["delta_max"] + thresholds["tolerance"]:
        return [f"filling-four-point: delta {rep.delta_estimate:.6g} above 2 log 2"]
    return []


@scenario("sharp-constant-probe",
          "exploratory: how close h / g comes to 4 / pi on non-ball bodies (never asserted)",
          ("body", "samples", "max_ratio", "reference"), reference=4.0 / math.pi, samples=500)
def _sharp_constant(config, thresholds, report):
    rng = np.random.default_rng(config.seed)
    for name, body in _default_bodies(config, rng):
        m = min(config.samples, int(thresholds["samples"]))
        X = _mixed_points(body, rng, m)
        V = rng.normal(size=X.shape)
        ratio = sharp_constant_ratio(body, X, V, COARSE_PLANES)
        report.row(name, m, float(np.max(ratio)), thresholds["reference"])
    return []


def list_scenarios() -> List[Scenario]:
    return [SCENARIOS[name] for name in SCENARIOS]


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    entry = SCENARIOS[config.name]
    header = {"statement": entry.statement, "thresholds": dict(entry.thresholds),
              "budgets": config.budgets()}
    if config.body is not None:
        header["body"] = str(config.body)
    report = ReportWriter(config.output, entry.name, entry.columns, header)
    start = time.perf_counter()
    failures = entry.runner(config, entry.thresholds, report)
    report.timing("total", time.perf_counter() - start)
    passed = not failures
    report.close(passed, failures)
    logger.info("%s: %s", entry.name, "PASS" if passed else "FAIL")
    return ScenarioResult(entry.name, passed, list(failures), list(report.paths))
