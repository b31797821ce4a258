"""Report rows and their CSV / JSON serialization (no timestamps, fixed column order)."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .errors import IntermapError

COLUMNS = ("experiment", "params", "metric", "value", "stderr", "tolerance", "reference",
           "pass", "config_hash", "seed")


class ReportError(IntermapError):
    exit_code = 3


@dataclass
class ReportRow:
    experiment: str
    params: dict
    metric: str
    value: float
    stderr: float | None = None
    tolerance: str | None = None    # key into the tolerance table; None = informational
    reference: float | None = None
    passed: bool | None = field(default=None)

    def __post_init__(self):
        if self.tolerance is not None and self.passed is None:
            self.passed = bool(tolerances.get(self.tolerance).check(self.value, self.reference))

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "params": self.params, "metric": self.metric,
                "value": _num(self.value), "stderr": _num(self.stderr),
                "tolerance": self.tolerance,
                "tolerance_rule": tolerances.get(self.tolerance).describe() if self.tolerance else None,
                "reference": _num(self.reference), "pass": self.passed}


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def all_pass(rows) -> bool:
    return all(r.passed is not False for r in rows)


def _write(path, writer):
    try:
        writer(path)
    except OSError as e:
        raise ReportError(f"cannot write {path}: {e.strerror}") from None


def emit_report(rows, out_dir, name: str, config_hash: str, seed: int, config: dict | None = None,
                tables: dict | None = None) -> list:
    """Write ``<name>.csv`` and ``<name>.json`` (plus one CSV per data table); return the paths."""
    rows = list(rows)
    if not rows:
        raise ValueError("emit_report needs at least one row")
    if not config_hash:
        raise ValueError("config hash required")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise ReportError(f"cannot create {out_dir}: {e.strerror}") from None
    paths = []

    def rows_csv(path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in rows:
                w.writerow([r.experiment, json.dumps(r.params, sort_keys=True), r.metric,
                            _fmt(r.value), _fmt(r.stderr), r.tolerance or "", _fmt(r.reference),
                            _fmt(r.passed) if r.passed is not None else "info",
                            config_hash, seed])

    p = os.path.join(out_dir, f"{name}.csv")
    _write(p, rows_csv)
    paths.append(p)

    for tname, (header, data) in sorted((tables or {}).items()):
        def table_csv(path, header=header, data=data):
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(list(header) + ["config_hash", "seed"])
                for rec in data:
                    w.writerow([_fmt(v) for v in rec] + [config_hash, seed])
        p = os.path.join(out_dir, f"{name}_{tname}.csv")
        _write(p, table_csv)
        paths.append(p)

    summary = {"experiment": name, "config_hash": config_hash, "seed": seed,
               "tolerance_version": tolerances.VERSION, "all_pass": all_pass(rows),
               "config": config, "rows": [r.as_dict() for r in rows]}

    def js(path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")

    p = os.path.join(out_dir, f"{name}.json")
    _write(p, js)
    paths.append(p)
    return paths


def load_report(path) -> dict:
    """Read a JSON summary, rejecting ones without a config hash."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not data.get("config_hash"):
        raise ReportError(f"{path}: report has no config hash")
    return data
