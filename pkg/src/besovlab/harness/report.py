"""Experiment reports: a nested JSON document plus a flat CSV table."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import io
import json
import math
import os

import numpy as np

from ..errors import ReportIOError

FIXED_COLUMNS = ("measured", "predicted", "margin", "pass")


@dataclass
class Row:
    params: dict
    measured: float
    predicted: float = math.nan
    margin: float = math.nan
    passed: bool | None = None
    rule: str | None = None


@dataclass
class Check:
    rule: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    partition: str
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    quick: bool = False

    def add(self, quantity, measured, predicted=math.nan, margin=math.nan, passed=None, rule=None, **params):
        self.rows.append(Row({**params, "quantity": quantity}, float(measured), float(predicted),
                             float(margin), None if passed is None else bool(passed), rule))

    def check(self, rule, passed, detail=""):
        self.checks.append(Check(rule, bool(passed), detail))
        return bool(passed)

    def fit(self, label, fit, predicted, **extra):
        self.fits.append({"label": label, "params": list(fit.params), "values": list(fit.values),
                          "slope": fit.slope, "intercept": fit.intercept,
                          "max_rel_residual": fit.max_rel_residual, "predicted": predicted, **extra})

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "quick": self.quick,
            "partition": self.partition,
            "config": _jsonable(self.config),
            "passed": self.passed,
            "checks": [{"rule": c.rule, "passed": c.passed, "detail": c.detail} for c in self.checks],
            "fits": _jsonable(self.fits),
            "rows": [{"params": _jsonable(r.params), "measured": _num(r.measured),
                      "predicted": _num(r.predicted), "margin": _num(r.margin),
                      "pass": r.passed, "rule": r.rule} for r in self.rows],
            "timings": self.timings,
        }


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _jsonable(obj):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def table_columns(report):
    cols = []
    for r in report.rows:
        for k in r.params:
            if k not in cols:
                cols.append(k)
    if "quantity" in cols:
        cols.remove("quantity")
        cols.append("quantity")
    return ["experiment", *cols, *FIXED_COLUMNS]


def render_table(report):
    """CSV text of the flat table (deterministic for a fixed report)."""
    cols = table_columns(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in report.rows:
        vals = {"experiment": report.experiment, **r.params, "measured": r.measured,
                "predicted": r.predicted, "margin": r.margin, "pass": r.passed}
        w.writerow([_fmt(vals.get(c)) for c in cols])
    return buf.getvalue()


def write_report(report, out_dir):
    """Write ``<experiment>.json`` and ``<experiment>.csv`` into ``out_dir``; returns both paths."""
    if not report.rows:
        raise ReportIOError(f"report for {report.experiment} has an empty table; nothing written",
                            path=str(out_dir))
    stem = os.path.join(out_dir, report.experiment)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        with open(stem + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(render_table(report))
    except OSError as exc:
        raise ReportIOError(f"cannot write report: {exc}", path=str(out_dir)) from exc
    return stem + ".json", stem + ".csv"


def _parse_cell(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path):
    """Rows of a flat table as dicts; numeric cells parsed back to int/float."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ReportIOError(f"cannot read table: {exc}", path=str(path)) from exc
    return [{k: _parse_cell(v) for k, v in r.items()} for r in rows]
