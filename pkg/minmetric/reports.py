"""
Report files of a scenario run: `<name>.csv` with the data rows,
`<name>.jsonl` with a header object carrying the thresholds followed by the
witness records, and `<name>.timing.csv` with wall-clock times.

Data files are byte-identical across runs with the same seed; wall-clock
times only go to the timing file.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def render_json(value: Any) -> str:
    """
    Returns value as compact JSON with sorted keys and floats rendered with
    17 significant digits; non-finite floats become strings
    """
    if isinstance(value, Mapping):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(f"{json.dumps(k)}:{render_json(v)}" for k, v in items) + "}"
    if isinstance(value, np.ndarray):
        return render_json(value.tolist())
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(render_json(v) for v in value) + "]"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return format_float(x) if math.isfinite(x) else json.dumps(format_float(x))
    return json.dumps(str(value), ensure_ascii=False)


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, np.ndarray):
        return " ".join(format_float(v) for v in value.ravel())
    return str(value)


class ReportWriter:
    """
    Collects the rows and records of one scenario and writes them on close.
    """

    def __init__(self, out_dir, name: str, columns: Sequence[str], header: Mapping[str, Any]):
        self.out_dir = Path(out_dir)
        self.name = name
        self.columns = list(columns)
        self.header = dict(header)
        self.rows = []
        self.records = []
        self.timings = []

    def row(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"ReportWriter: expected {len(self.columns)} values")
        self.rows.append([_cell(v) for v in values])

    def record(self, **fields):
        self.records.append(fields)

    def timing(self, label: str, seconds: float):
        self.timings.append((label, f"{seconds:.6f}"))

    @property
    def paths(self) -> Iterable[Path]:
        return [self.out_dir / f"{self.name}{suffix}"
                for suffix in (".csv", ".jsonl", ".timing.csv")]

    def close(self, passed: bool, failures: Sequence[str] = ()):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        csv_path, jsonl_path, timing_path = self.paths
        with csv_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns)
            writer.writerows(self.rows)
        head = dict(self.header, scenario=self.name, passed=passed, failures=list(failures))
        with jsonl_path.open("w", encoding="utf-8") as fh:
            fh.write(render_json(head) + "\n")
            for record in self.records:
                fh.write(render_json(record) + "\n")
        with timing_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "seconds"])
            writer.writerows(self.timings)
        logger.debug("wrote %s", ", ".join(str(p) for p in self.paths))
