"""
Lab configuration.

Defaults live in ``minmetric-config.yaml`` at the repository root. When the
yaml carries ``dotenv: .env`` the file is loaded with python-dotenv before the
environment is consulted. Precedence is CLI flag > environment > yaml >
built-in default.
"""
from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

import yaml
from dotenv import load_dotenv

from .errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_FILENAME = "minmetric-config.yaml"
THREADS_ENV = "MINMETRIC_THREADS"

# keys allowed under `budgets:`
BUDGET_KEYS = (
    "graph_nodes",
    "quadruples",
    "samples",
    "mesh_level",
    "plane_samples",
    "theta_samples",
    "knn",
    "collar_levels",
)
TOP_LEVEL_KEYS = ("seed", "threads", "dotenv", "budgets", "output")


@dataclass(frozen=True)
class LabConfig:
    seed: int = 20240607
    graph_nodes: int = 20000
    quadruples: int = 100000
    samples: int = 10000
    mesh_level: int = 3
    plane_samples: int = 512
    theta_samples: int = 256
    knn: int = 12
    collar_levels: int = 10
    threads: int = 1
    output: str = "reports"

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("LabConfig: seed must be a 64-bit unsigned integer")
        for key in BUDGET_KEYS + ("threads",):
            value = getattr(self, key)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"LabConfig: {key} must be a positive integer")

    def replace(self, **changes) -> "LabConfig":
        """
        Returns a copy with the non-None overrides applied
        """
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


_thread_cap: Optional[int] = None


def set_thread_cap(threads: Optional[int]) -> None:
    global _thread_cap
    if threads is not None and threads <= 0:
        raise ConfigError("LabConfig: threads must be a positive integer")
    _thread_cap = threads


def thread_cap() -> int:
    """
    Returns the worker-thread cap: an explicit setting, else
    MINMETRIC_THREADS, else 1
    """
    if _thread_cap is not None:
        return _thread_cap
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"LabConfig: {THREADS_ENV} is not an integer")
    if value <= 0:
        raise ConfigError(f"LabConfig: {THREADS_ENV} must be positive")
    return value


def _flatten(raw: Mapping[str, Any]) -> dict:
    unknown = set(raw) - set(TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"LabConfig: unknown keys {sorted(unknown)}")
    flat = {k: raw[k] for k in ("seed", "threads", "output") if k in raw}
    budgets = raw.get("budgets") or {}
    if not isinstance(budgets, Mapping):
        raise ConfigError("LabConfig: budgets must be a mapping")
    unknown = set(budgets) - set(BUDGET_KEYS)
    if unknown:
        raise ConfigError(f"LabConfig: unknown budget keys {sorted(unknown)}")
    flat.update(budgets)
    return flat


def find_config(start: Optional[Path] = None) -> Optional[Path]:
    """
    Returns the nearest minmetric-config.yaml walking up from start
    """
    here = Path(start or Path.cwd()).resolve()
    for directory in (here, *here.parents):
        candidate = directory / CONFIG_FILENAME
        if candidate.is_file():
            return candidate
    return None


def load_config(path: Optional[os.PathLike] = None) -> LabConfig:
    path = Path(path) if path is not None else find_config()
    if path is None:
        logger.debug("no %s found, using built-in defaults", CONFIG_FILENAME)
        return LabConfig()
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as err:
        raise ConfigError(f"LabConfig: cannot read {path}: {err}")
    if not isinstance(raw, Mapping):
        raise ConfigError(f"LabConfig: {path} is not a mapping")

    dotenv = raw.get("dotenv")
    if dotenv:
        load_dotenv(Path(path).parent / dotenv)

    flat = _flatten(raw)
    env_threads = os.environ.get(THREADS_ENV)
    if env_threads is not None:
        try:
            flat["threads"] = int(env_threads)
        except ValueError:
            raise ConfigError(f"LabConfig: {THREADS_ENV} is not an integer")
    try:
        return LabConfig(**flat)
    except TypeError as err:
        raise ConfigError(f"LabConfig: {err}")


def map_threads(fn: Callable[[Any], Any], items: Sequence[Any]) -> list:
    """
    Returns [fn(item) for item in items], spread over at most thread_cap()
    workers. Order of the results follows items.
    """
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
