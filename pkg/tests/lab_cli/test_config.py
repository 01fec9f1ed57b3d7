import pytest

from minmetric.config import (
    CONFIG_FILENAME, THREADS_ENV, LabConfig, find_config, load_config, map_threads,
    set_thread_cap, thread_cap
)
from minmetric.errors import ConfigError

from .utils import write_config


def test_load_config_reads_budgets(lab, tmp_path):
    assert lab.graph_nodes == 300
    assert lab.mesh_level == 2
    assert lab.threads == 1
    assert lab.output == str(tmp_path / "reports")


def test_defaults_without_a_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    if find_config() is not None:
        pytest.skip("a minmetric-config.yaml sits above the temporary directory")
    assert load_config() == LabConfig()


def test_find_config_walks_up(config_path, tmp_path):
    nested = tmp_path / "a" / "b"
    nested.mkdir(parents=True)
    assert find_config(nested) == config_path.resolve()


def test_unknown_top_level_key(tmp_path):
    path = write_config(tmp_path, colour="blue")
    with pytest.raises(ConfigError, match="LabConfig: unknown keys"):
        load_config(path)


def test_unknown_budget_key(tmp_path):
    path = write_config(tmp_path, budgets={"nodes": 10})
    with pytest.raises(ConfigError, match="LabConfig: unknown budget keys"):
        load_config(path)


def test_budgets_must_be_a_mapping(tmp_path):
    path = write_config(tmp_path, budgets=[1, 2])
    with pytest.raises(ConfigError, match="LabConfig: budgets must be a mapping"):
        load_config(path)


def test_zero_budget(tmp_path):
    path = write_config(tmp_path, budgets={"samples": 0})
    with pytest.raises(ConfigError, match="LabConfig: samples must be a positive integer"):
        load_config(path)


def test_not_a_mapping(tmp_path):
    path = tmp_path / CONFIG_FILENAME
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="is not a mapping"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="LabConfig: cannot read"):
        load_config(tmp_path / "absent.yaml")


def test_seed_range():
    with pytest.raises(ConfigError, match="LabConfig: seed must be a 64-bit unsigned integer"):
        LabConfig(seed=2 ** 64)
    with pytest.raises(ConfigError, match="LabConfig: seed must be a 64-bit unsigned integer"):
        LabConfig(seed=-1)


def test_environment_overrides_yaml(config_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert load_config(config_path).threads == 3


def test_environment_must_be_an_integer(config_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError, match="LabConfig: MINMETRIC_THREADS is not an integer"):
        load_config(config_path)


def test_dotenv_is_loaded(tmp_path):
    (tmp_path / ".env").write_text(f"{THREADS_ENV}=4\n")
    path = write_config(tmp_path, dotenv=".env")
    assert load_config(path).threads == 4


def test_replace_ignores_none(lab):
    changed = lab.replace(seed=None, samples=5)
    assert changed.seed == lab.seed
    assert changed.samples == 5


def test_thread_cap(monkeypatch):
    assert thread_cap() == 1
    monkeypatch.setenv(THREADS_ENV, "6")
    assert thread_cap() == 6
    set_thread_cap(2)
    assert thread_cap() == 2


def test_thread_cap_errors(monkeypatch):
    with pytest.raises(ConfigError, match="LabConfig: threads must be a positive integer"):
        set_thread_cap(0)
    monkeypatch.setenv(THREADS_ENV, "0")
    with pytest.raises(ConfigError, match="LabConfig: MINMETRIC_THREADS must be positive"):
        thread_cap()


@pytest.mark.parametrize("threads", [1, 4])
def test_map_threads_keeps_order(threads):
    set_thread_cap(threads)
    expect = [k * k for k in range(50)]
    actual = map_threads(lambda k: k * k, range(50))
    assert expect == actual
