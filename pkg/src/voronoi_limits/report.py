"""Experiment reports and their on-disk form (JSON plus CSV tables)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .stats import Histogram

SCHEMA_VERSION = 1


def stat(value, stderr=None, exact: bool = False) -> dict:
    """A reported number: either with a standard error or flagged exact."""
    value = float(value) if not isinstance(value, int) else value
    if exact:
        return {"value": value, "exact": True}
    if stderr is None:
        raise ValueError("inexact statistics need a stderr")
    return {"value": value, "stderr": float(stderr)}


def check(name: str, passed: bool, value, threshold, relation: str) -> dict:
    return {"name": name, "passed": bool(passed), "value": _plain(value),
            "threshold": _plain(threshold), "relation": relation}


def _plain(x):
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    x = float(x)
    return x if math.isfinite(x) else repr(x)


@dataclass
class ExperimentReport:
    name: str
    config: dict
    seed: int
    config_hash: str
    version: str
    statistics: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    exclusions: dict = field(default_factory=dict)
    trial_columns: list = field(default_factory=list)
    trial_rows: list = field(default_factory=list)
    histograms: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def failed_checks(self) -> list:
        return [c for c in self.checks if not c["passed"]]

    def to_json(self) -> dict:
        """Numeric content only; wall time lives in ``timing.json``."""
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "version": self.version,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "config": self.config,
            "statistics": {k: {kk: _plain(vv) for kk, vv in v.items()} for k, v in self.statistics.items()},
            "checks": self.checks,
            "passed": self.passed,
            "exclusions": self.exclusions,
        }


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return int(v)
    return v


def write_table(path, columns, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow([_cell(v) for v in row])


def write_histogram(path, hist: Histogram) -> None:
    write_table(path, ["bin_lo", "bin_hi", "count"], hist.rows())


def write_report(report: ExperimentReport, out_dir) -> Path:
    """Write ``report.json``, ``timing.json``, ``trials.csv`` and any tables."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "report.json").open("w") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with (out / "timing.json").open("w") as fh:
        json.dump({"name": report.name, "wall_time_s": report.wall_time}, fh, indent=2)
        fh.write("\n")
    if report.trial_columns:
        write_table(out / "trials.csv", report.trial_columns, report.trial_rows)
    for key, hist in report.histograms.items():
        write_histogram(out / f"hist_{key}.csv", hist)
    for fname, (columns, rows) in report.tables.items():
        write_table(out / fname, columns, rows)
    return out
