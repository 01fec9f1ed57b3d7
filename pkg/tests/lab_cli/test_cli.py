import math

from pytest import approx

from minmetric.lab_cli import cli

from .utils import write_spec


def test_list_scenarios(invoke):
    result = invoke("list-scenarios")
    assert result.exit_code == 0
    names = [line.split("\t")[0] for line in result.output.splitlines()]
    assert "ball-metric-equality" in names
    assert "fat-triangles-flat-face" in names
    assert "filling-vs-graph" in names


def test_eval_metric(invoke, ball_spec):
    result = invoke("eval-metric", "--body", ball_spec, "--evaluator", "hilbert",
                    "--x", "0 0 0", "--v", "1 0 0")
    assert result.exit_code == 0
    assert float(result.output.strip()) == approx(1.0)


def test_eval_metric_minimal_off_center(invoke, ball_spec):
    result = invoke("eval-metric", "--body", ball_spec, "--evaluator", "exact_minimal",
                    "--x", "0.5,0,0", "--v", "1,0,0")
    assert result.exit_code == 0
    expect = 1.0 / 0.75
    actual = float(result.output.strip())
    assert expect == approx(actual)


def test_bad_spec_exits_two(invoke, tmp_path):
    spec = write_spec(tmp_path, "bad.spec", "kind = ball\ndim = 3\nradius = -1\n")
    result = invoke("eval-metric", "--body", spec, "--evaluator", "hilbert",
                    "--x", "0 0 0", "--v", "1 0 0")
    assert result.exit_code == 2
    assert "Ball: radius must be positive" in result.output


def test_exterior_point_exits_two(invoke, ball_spec):
    result = invoke("eval-metric", "--body", ball_spec, "--evaluator", "hilbert",
                    "--x", "2 0 0", "--v", "1 0 0")
    assert result.exit_code == 2
    assert "error:" in result.output


def test_bad_vector_exits_two(invoke, ball_spec):
    result = invoke("eval-metric", "--body", ball_spec, "--evaluator", "hilbert",
                    "--x", "zero", "--v", "1 0 0")
    assert result.exit_code == 2


def test_distance_hilbert(invoke, ball_spec):
    result = invoke("distance", "--body", ball_spec, "--method", "hilbert",
                    "--x", "0 0 0", "--y", "0.5 0 0")
    assert result.exit_code == 0
    x, y, lower, upper, method, seconds = result.output.strip().split(",")
    assert (x, y, method) == ("0 0 0", "0.5 0 0", "hilbert")
    assert float(lower) == float(upper)
    assert float(upper) == approx(math.atanh(0.5))


def test_distance_graph_brackets(invoke, ball_spec):
    result = invoke("distance", "--body", ball_spec, "--method", "graph",
                    "--x", "-0.5 0 0", "--y", "0.5 0 0", "--budget", 300, "--seed", 1)
    assert result.exit_code == 0
    fields = result.output.strip().split(",")
    lower, upper = float(fields[2]), float(fields[3])
    assert lower <= upper
    assert upper >= 2.0 * math.atanh(0.5) * (1.0 - 1e-6)


def test_delta(invoke, ball_spec):
    result = invoke("delta", "--body", ball_spec, "--samples", 50, "--seed", 3)
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    estimate, count, method, seed, uncertainty = lines[0].split(",")
    assert (count, method, seed) == ("50", "hilbert", "3")
    assert 0.0 <= float(estimate) <= math.log(2.0) + 1e-6
    assert sum(line.startswith("# point") for line in lines) == 4
    assert lines[-1].startswith("# distances")


def test_delta_rejects_negative_samples(invoke, ball_spec):
    result = invoke("delta", "--body", ball_spec, "--samples", -1)
    assert result.exit_code == 2


def test_scenario_writes_reports(invoke, tmp_path):
    out = tmp_path / "out"
    result = invoke("scenario", "ball-metric-equality", "--out", out)
    assert result.exit_code == 0
    assert result.output.startswith("ball-metric-equality: PASS")
    assert (out / "ball-metric-equality.csv").is_file()
    assert (out / "ball-metric-equality.jsonl").is_file()


def test_unknown_scenario_exits_two(invoke):
    result = invoke("scenario", "nope")
    assert result.exit_code == 2
    assert "Scenario: unknown scenario 'nope'" in result.output


def test_bad_config_exits_two(runner, tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("colour: blue\n")
    result = runner.invoke(cli, ["--config", str(path), "list-scenarios"])
    assert result.exit_code == 2
    assert "LabConfig: unknown keys" in result.output
