from scripts.run_scenarios import main

from .utils import Cheap


def test_run_scenarios_summary(runner, config_path, tmp_path):
    names = [cheap.value for cheap in Cheap]
    result = runner.invoke(main, ["--config", str(config_path), "--out", str(tmp_path / "out"),
                                  *names])
    assert result.exit_code == 0
    assert result.output.splitlines()[-1] == f"{len(names)}/{len(names)} passed"
    for name in names:
        assert f"{name}: PASS" in result.output
        assert (tmp_path / "out" / f"{name}.csv").is_file()


def test_run_scenarios_reports_unknown_names(runner, config_path, tmp_path):
    result = runner.invoke(main, ["--config", str(config_path), "--out", str(tmp_path), "nope"])
    assert result.exit_code == 1
    assert "0/1 passed" in result.output
