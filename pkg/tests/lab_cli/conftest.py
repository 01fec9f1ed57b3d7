import os

import pytest
from click.testing import CliRunner

from minmetric.config import THREADS_ENV, load_config, set_thread_cap
from minmetric.lab_cli import cli
from minmetric.scenarios import ScenarioConfig

from .utils import write_config, write_spec


@pytest.fixture(autouse=True)
def isolate_threads(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    set_thread_cap(None)
    yield
    set_thread_cap(None)
    os.environ.pop(THREADS_ENV, None)


@pytest.fixture
def config_path(tmp_path):
    yield write_config(tmp_path)


@pytest.fixture
def lab(config_path):
    yield load_config(config_path)


@pytest.fixture
def create_scenario_config(lab, tmp_path):
    def create_scenario_config(name, out=None, **changes):
        out = tmp_path / "reports" if out is None else out
        return ScenarioConfig.from_lab(name, lab.replace(**changes), None, str(out))

    yield create_scenario_config


@pytest.fixture
def ball_spec(tmp_path):
    yield write_spec(tmp_path, "ball.spec", "kind = ball\ndim = 3\n")


@pytest.fixture
def runner():
    yield CliRunner()


@pytest.fixture
def invoke(runner, config_path):
    def invoke(*args):
        return runner.invoke(cli, ["--config", str(config_path), *map(str, args)])

    yield invoke
