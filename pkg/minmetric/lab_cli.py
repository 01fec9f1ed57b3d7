"""
Command-line entry point: `python -m minmetric ...`.

Exit status is 0 on success, 1 when a scenario assertion fails and 2 when
an input (body spec, config, option) cannot be used.
"""
import logging
import sys
import time

import click
import numpy as np

from .config import load_config, set_thread_cap
from .convex_body import load_body_spec
from .distances import (
    DistanceReport,
    GeodesicGraph,
    geodesic_graph_distance,
    hilbert_distance,
    minimal_distance_lower,
)
from .errors import MinMetricError
from .finsler_metrics import MetricTag, make_evaluator
from .gromov import four_point_delta_from_arrays, quadruple_distances, sample_quadruples
from .scenarios import ScenarioConfig, list_scenarios, run_scenario

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_INPUT = 2


class VectorType(click.ParamType):
    """
    Decimal floats separated by spaces or commas
    """
    name = "vector"

    def convert(self, value, param, ctx):
        if isinstance(value, np.ndarray):
            return value
        try:
            return np.array([float(tok) for tok in str(value).replace(",", " ").split()])
        except ValueError:
            self.fail(f"'{value}' is not a list of numbers", param, ctx)


VECTOR = VectorType()


def _fail(err: Exception):
    click.echo(f"error: {err}", err=True)
    sys.exit(EXIT_INPUT)


def _vector_text(x) -> str:
    return " ".join(f"{c:.17g}" for c in np.atleast_1d(x))


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="minmetric-config.yaml to read instead of the nearest one")
@click.option("--threads", type=int, help="worker threads (overrides MINMETRIC_THREADS)")
@click.option("-v", "--verbose", count=True, help="-v info, -vv debug")
@click.pass_context
def cli(ctx, config_path, threads, verbose):
    """
    Minimal-metric lab: evaluate metrics, distances and hyperbolicity
    estimates on convex bodies.
    """
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, format="%(name)s:%(levelname)s:%(message)s")
    try:
        lab = load_config(config_path)
        lab = lab.replace(threads=threads)
        set_thread_cap(lab.threads)
    except MinMetricError as err:
        _fail(err)
    ctx.obj = lab


@cli.command("eval-metric")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--evaluator", "tag", required=True,
              type=click.Choice([t.value for t in MetricTag]))
@click.option("--x", "x", required=True, type=VECTOR)
@click.option("--v", "v", required=True, type=VECTOR)
@click.option("--epsilon", type=float, help="collar width of model_F")
@click.pass_obj
def eval_metric(lab, body_path, tag, x, v, epsilon):
    """
    Prints the metric value at (x, v).
    """
    try:
        body = load_body_spec(body_path)
        evaluator = make_evaluator(tag, body, epsilon=epsilon,
                                   plane_samples=lab.plane_samples,
                                   theta_samples=lab.theta_samples)
        value = evaluator(x, v)
    except MinMetricError as err:
        _fail(err)
    click.echo(f"{float(value):.17g}")


@cli.command("distance")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["graph", "hilbert", "lower"]), default="graph",
              show_default=True)
@click.option("--x", "x", required=True, type=VECTOR)
@click.option("--y", "y", required=True, type=VECTOR)
@click.option("--evaluator", "tag", default="exact_minimal", show_default=True,
              type=click.Choice([t.value for t in MetricTag]))
@click.option("--budget", type=int, help="roadmap nodes (default from config)")
@click.option("--seed", type=int)
@click.option("--relax", is_flag=True, help="shorten the graph witness")
@click.pass_obj
def distance(lab, body_path, method, x, y, tag, budget, seed, relax):
    """
    Prints `x, y, lower, upper, method, seconds` for one pair of points.
    """
    start = time.perf_counter()
    try:
        body = load_body_spec(body_path)
        if method == "hilbert":
            h = float(hilbert_distance(body, x, y))
            report = DistanceReport(h, h, ("hilbert",))
        elif method == "lower":
            report = DistanceReport(float(minimal_distance_lower(body, x, y)), np.inf,
                                    ("lower",))
        else:
            evaluator = make_evaluator(tag, body, plane_samples=lab.plane_samples,
                                       theta_samples=lab.theta_samples)
            report = geodesic_graph_distance(
                evaluator, body, x, y, budget or lab.graph_nodes,
                lab.seed if seed is None else seed, lab.knn, lab.collar_levels, relax)
    except MinMetricError as err:
        _fail(err)
    if report.seconds == 0.0:
        report = DistanceReport(report.lower, report.upper, report.method, report.witness,
                                time.perf_counter() - start)
    click.echo(",".join(report.csv_row(x, y)))


@cli.command("delta")
@click.option("--body", "body_path", required=True, type=click.Path(dir_okay=False))
@click.option("--samples", type=int, help="quadruples (default from config)")
@click.option("--seed", type=int)
@click.option("--method", type=click.Choice(["hilbert", "graph"]), default="hilbert",
              show_default=True)
@click.option("--evaluator", "tag", default="exact_minimal", show_default=True,
              type=click.Choice([t.value for t in MetricTag]))
@click.pass_obj
def delta(lab, body_path, samples, seed, method, tag):
    """
    Prints `delta_estimate, n_samples, method, seed, uncertainty` for random
    quadruples, then the witness quadruple.
    """
    seed = lab.seed if seed is None else seed
    samples = samples or lab.quadruples
    if samples <= 0:
        raise click.BadParameter("must be positive", param_hint="--samples")
    try:
        body = load_body_spec(body_path)
        points = sample_quadruples(body, samples, np.random.default_rng(seed))
        graph = None
        if method == "graph":
            evaluator = make_evaluator(tag, body, plane_samples=lab.plane_samples,
                                       theta_samples=lab.theta_samples)
            graph = GeodesicGraph.build(evaluator, lab.graph_nodes, seed, lab.knn,
                                        lab.collar_levels)
        lower, upper = quadruple_distances(body, points, method, graph)
        report = four_point_delta_from_arrays(points, lower, upper, method)
    except MinMetricError as err:
        _fail(err)
    click.echo(",".join(report.csv_row(seed)))
    quad = report.worst_quadruple
    for point in quad.points:
        click.echo(f"# point {_vector_text(point)}")
    click.echo(f"# distances {_vector_text(quad.distances)}")


@cli.command("scenario")
@click.argument("name")
@click.option("--seed", type=int)
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--body", "body_path", type=click.Path(dir_okay=False),
              help="body spec for the scenarios that take one")
@click.pass_obj
def scenario(lab, name, seed, out_dir, body_path):
    """
    Runs a named scenario and writes its reports.
    """
    try:
        config = ScenarioConfig.from_lab(name, lab.replace(seed=seed), body_path, out_dir)
        result = run_scenario(config)
    except MinMetricError as err:
        _fail(err)
    click.echo(f"{result.name}: {'PASS' if result.passed else 'FAIL'}")
    for failure in result.failures:
        click.echo(f"  {failure}")
    for path in result.paths:
        click.echo(f"  wrote {path}")
    if not result.passed:
        sys.exit(EXIT_FAILED)


@cli.command("list-scenarios")
def list_scenarios_command():
    """
    Prints every scenario with the statement it checks.
    """
    for entry in list_scenarios():
        click.echo(f"{entry.name}\t{entry.statement}")


def main():
    cli(prog_name="minmetric")
