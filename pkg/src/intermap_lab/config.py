"""Experiment configuration: flat ``key = value`` text with dotted or
sectioned map parameters.

    experiment = scaling
    seed = 1
    [map]            # or map.kind = circle
    kind = circle
    gamma = 2.0

All violations are collected and reported together.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from .errors import ParameterError
from .maps import MapSpec

EXPERIMENTS = ("scaling", "distortion", "correlation", "limit_law", "large_dev", "recurrence",
               "visits", "evl", "density", "all")

MAP_KEYS = {"kind", "gamma", "kappa", "solver_tol", "max_newton_iters"}

# knob -> (type, lower bound, strict). Every numeric knob must be positive.
KNOBS = {
    "seed": (int, 0, False),
    "workers": (int, 1, False),
    "samples": (int, 1, True),
    "n_max": (int, 1, True),
    "N": (int, 1, True),
    "r": (float, 0.0, True),
    "bins": (int, 1, True),
    "cells": (int, 100, False),
    "n": (int, 1, True),
    "p_max": (int, 1, True),
    "pairs": (int, 2, False),
    "eps": (float, 0.0, True),
    "t": (float, 0.0, True),
    "burn_in": (int, 0, False),
    "centers": (int, 1, True),
    "batches": (int, 1, True),
}


class ConfigError(ParameterError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    map_kind: str
    gamma: float
    kappa: float | None = None
    seed: int = 0
    workers: int = 1
    knobs: dict = field(default_factory=dict)
    out: str | None = None
    solver_tol: float = 1e-14
    max_newton_iters: int = 50

    def spec(self) -> MapSpec:
        kw = {"solver_tol": self.solver_tol, "max_newton_iters": self.max_newton_iters}
        if self.map_kind == "circle":
            return MapSpec.circle(self.gamma, **kw)
        return MapSpec.interval(self.kappa, self.gamma, **kw)

    def get(self, name: str, default):
        return self.knobs.get(name, default)

    def canonical(self) -> dict:
        """Everything that determines the results (the output path does not)."""
        d = asdict(self)
        d.pop("out")
        d["knobs"] = dict(sorted(self.knobs.items()))
        return d

    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _parse_value(text: str):
    t = text.strip()
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    return t


def _raw_pairs(text: str, problems: list) -> dict:
    out = {}
    section = ""
    for ln, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            if section not in ("", "map"):
                problems.append(f"line {ln}: unknown section [{section}]")
            continue
        if "=" not in s:
            problems.append(f"line {ln}: expected key = value")
            continue
        k, v = s.split("=", 1)
        k = k.strip()
        if section:
            k = f"{section}.{k}"
        if k in out:
            problems.append(f"duplicate key {k!r}")
        out[k] = _parse_value(v)
    return out


def _number(key, value, typ, lo, strict, problems):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{key} must be a number")
        return None
    if typ is int:
        if float(value) != int(value):
            problems.append(f"{key} must be an integer")
            return None
        value = int(value)
    else:
        value = float(value)
    if (value <= lo) if strict else (value < lo):
        problems.append(f"{key} must be {'>' if strict else '>='} {lo:g}")
        return None
    return value


def parse_config(text: str) -> ExperimentConfig:
    problems: list[str] = []
    raw = _raw_pairs(text, problems)

    experiment = raw.pop("experiment", None)
    if experiment is None:
        problems.append("missing required key 'experiment'")
    elif experiment not in EXPERIMENTS:
        problems.append(f"unknown experiment {experiment!r}")

    mp = {k[4:]: raw.pop(k) for k in list(raw) if k.startswith("map.")}
    for k in mp:
        if k not in MAP_KEYS:
            problems.append(f"unknown key 'map.{k}'")
    kind = mp.get("kind")
    if kind is None:
        problems.append("missing required key 'map.kind'")
    elif kind not in ("circle", "interval"):
        problems.append("map.kind must be circle or interval")
    gamma = mp.get("gamma")
    if gamma is None:
        problems.append("missing required key 'map.gamma'")
    elif isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
        problems.append("map.gamma must be a number")
        gamma = None
    elif not gamma > 1:
        problems.append("gamma must be > 1")
    kappa = mp.get("kappa")
    if kind == "interval":
        if kappa is None:
            problems.append("missing required key 'map.kappa'")
        elif isinstance(kappa, bool) or not isinstance(kappa, (int, float)):
            problems.append("map.kappa must be a number")
        elif not 0 < kappa < 1:
            problems.append("kappa must lie in (0, 1)")
        elif gamma is not None and gamma > 1 and not kappa * (gamma - 1) < 1:
            if experiment in ("density", "all"):
                problems.append("invariant density needs kappa * (gamma - 1) < 1")
    elif kind == "circle" and kappa is not None:
        problems.append("map.kappa is only valid for interval maps")
    if experiment == "density" and kind == "circle":
        problems.append("density requires interval map")

    out = raw.pop("out", None)
    knobs = {}
    for k, v in raw.items():
        if k not in KNOBS:
            problems.append(f"unknown key {k!r}")
            continue
        val = _number(k, v, *KNOBS[k], problems)
        if val is not None:
            knobs[k] = val
    if "r" in knobs and not knobs["r"] < 0.1:
        problems.append("r must be < 0.1")

    solver = {}
    for k, typ in (("solver_tol", float), ("max_newton_iters", int)):
        if k in mp:
            solver[k] = _number(f"map.{k}", mp[k], typ, 0, True, problems)

    if problems:
        raise ConfigError(problems)
    seed = knobs.pop("seed", 0)
    workers = knobs.pop("workers", 1)
    cfg = ExperimentConfig(experiment, kind, float(gamma), None if kappa is None else float(kappa),
                           seed, workers, knobs, out, **solver)
    try:
        cfg.spec()
    except ParameterError as e:
        raise ConfigError([str(e)]) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError([f"cannot read config {path}: {e.strerror}"]) from None
    return parse_config(text)
