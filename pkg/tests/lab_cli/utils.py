from enum import Enum
from pathlib import Path

import yaml

from minmetric.config import CONFIG_FILENAME

SMALL_BUDGETS = {
    "graph_nodes": 300,
    "quadruples": 100,
    "samples": 200,
    "mesh_level": 2,
    "plane_samples": 64,
    "theta_samples": 64,
    "knn": 8,
    "collar_levels": 6,
}


class Cheap(Enum):
    """
    Scenarios that finish in well under a second at SMALL_BUDGETS
    """
    BALL = "ball-metric-equality"
    HALFSPACE = "halfspace-equality"
    PRODUCT = "product-degeneracy"
    COLLAR = "collar-estimate"


def write_config(directory: Path, **top) -> Path:
    """
    Returns the path of a minmetric-config.yaml written into directory
    """
    raw = {"seed": 7, "threads": 1, "budgets": dict(SMALL_BUDGETS),
           "output": str(directory / "reports")}
    raw.update(top)
    path = directory / CONFIG_FILENAME
    path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    return path


def write_spec(directory: Path, name: str, text: str) -> Path:
    path = directory / name
    path.write_text(text, encoding="utf-8")
    return path
