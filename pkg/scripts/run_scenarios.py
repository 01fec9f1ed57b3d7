import sys

import click

from minmetric.config import load_config, set_thread_cap
from minmetric.errors import MinMetricError
from minmetric.scenarios import ScenarioConfig, list_scenarios, run_scenario

# scenarios that need minutes at the default budgets
SLOW = ("graph-fidelity", "filling-vs-graph", "delta-contrast", "fat-triangles-flat-face",
        "quasi-geodesic-certification", "filling-four-point")


@click.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False))
@click.option("--skip-slow", is_flag=True, help="leave out the roadmap and mesh scenarios")
@click.argument("names", nargs=-1)
def main(config_path, out_dir, skip_slow, names):
    """
    Runs the named scenarios (all of them by default) with the budgets of
    minmetric-config.yaml and prints a pass/fail summary.
    """
    lab = load_config(config_path)
    set_thread_cap(lab.threads)
    names = list(names) or [entry.name for entry in list_scenarios()]
    if skip_slow:
        names = [name for name in names if name not in SLOW]

    click.echo(f"seed {lab.seed}, threads {lab.threads}, reports in {out_dir or lab.output}")
    failed = []
    for name in names:
        try:
            result = run_scenario(ScenarioConfig.from_lab(name, lab, None, out_dir))
        except MinMetricError as err:
            click.echo(f"{name}: error: {err}", err=True)
            failed.append(name)
            continue
        click.echo(f"{name}: {'PASS' if result.passed else 'FAIL'}")
        for failure in result.failures:
            click.echo(f"  {failure}")
        if not result.passed:
            failed.append(name)

    click.echo(f"{len(names) - len(failed)}/{len(names)} passed")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
