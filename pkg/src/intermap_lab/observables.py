"""Observables for Birkhoff sums, correlations and extreme values.

Each observable knows how to encode itself for the numba kernels and how to
compute its exact mean under normalized Lebesgue measure (the invariant
measure of the circle map).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from . import _mc
from .errors import ParameterError
from .maps import MapSpec


def circle_distance(x, xi):
    d = np.abs(np.asarray(x, float) - xi)
    return np.where(d > 1.0, 2.0 - d, d)


def distance(spec: MapSpec | None, x, xi):
    """Distance on the circle for T, plain distance on the interval for S."""
    if spec is not None and spec.kind == "circle":
        return circle_distance(x, xi)
    return np.abs(np.asarray(x, float) - xi)


@dataclass(frozen=True)
class Observable:
    mean_subtracted: bool = field(default=False, kw_only=True)

    code = -1

    def _raw_params(self, circle: bool) -> np.ndarray:
        raise NotImplementedError

    def _breakpoints(self) -> list:
        return []

    def encode(self, spec: MapSpec, shift: float | None = None) -> tuple:
        """(code, params) for the kernels; the shift is the subtracted mean."""
        circle = spec.kind == "circle"
        op = self._raw_params(circle)
        if shift is None:
            shift = self.lebesgue_mean(spec) if (self.mean_subtracted and circle) else 0.0
        op[self._shift_slot] = shift
        return self.code, op

    def __call__(self, x, spec: MapSpec | None = None, shift: float | None = None):
        spec = spec or MapSpec.circle(2.0)
        code, op = self.encode(spec, shift=shift)
        xv = np.atleast_1d(np.asarray(x, float)).ravel()
        out = _mc.obs_apply(code, op, xv)
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])

    def lebesgue_mean(self, spec: MapSpec) -> float:
        """Mean under normalized Lebesgue measure on [-1, 1]."""
        code, op = self.encode(spec, shift=0.0)
        f = lambda t: float(_mc.obs_value(code, op, t))
        pts = sorted(p for p in self._breakpoints() if -1.0 < p < 1.0)
        edges = [-1.0] + pts + [1.0]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi > lo:
                total += integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
        return 0.5 * total

    def centered(self) -> "Observable":
        return replace(self, mean_subtracted=True)


@dataclass(frozen=True)
class HolderPower(Observable):
    """``scale * d(x, center)^nu``; nu-Hoelder for nu <= 1, Lipschitz above."""

    nu: float = 1.0
    center: float = 0.0
    scale: float = 1.0

    code = _mc.OBS_POWER
    _shift_slot = 3

    def __post_init__(self):
        if not self.nu > 0:
            raise ParameterError("nu must be > 0")

    def _raw_params(self, circle):
        return np.array([self.nu, self.center, self.scale, 0.0, float(circle), 0.0])

    def _breakpoints(self):
        c = self.center
        return [c, c - 1.0 if c > 0 else c + 1.0]

    def value_at(self, x: float, spec: MapSpec) -> float:
        """Uncentered value, e.g. at the neutral point."""
        return self.scale * float(distance(spec, x, self.center)) ** self.nu


@dataclass(frozen=True)
class IndicatorSmoothed(Observable):
    """C^1 indicator of (lo, hi): smoothstep ramps of width ``width`` inside the ends.

    The default width is 1e-3 of the interval length.
    """

    lo: float = -0.5
    hi: float = 0.5
    width: float | None = None
    scale: float = 1.0

    code = _mc.OBS_SMOOTH
    _shift_slot = 4

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ParameterError("indicator needs lo < hi")
        if self.width is None:
            object.__setattr__(self, "width", 1e-3 * (self.hi - self.lo))
        if not 0 < self.width <= 0.5 * (self.hi - self.lo):
            raise ParameterError("mollification width must lie in (0, (hi - lo)/2]")

    def _raw_params(self, circle):
        return np.array([self.lo, self.hi, self.width, self.scale, 0.0, 0.0])

    def _breakpoints(self):
        return [self.lo, self.lo + self.width, self.hi - self.width, self.hi]

    def lebesgue_mean(self, spec=None) -> float:
        # each smoothstep ramp integrates to width/2
        return 0.5 * self.scale * (self.hi - self.lo - self.width)


@dataclass(frozen=True)
class LogDist(Observable):
    """g1(d(x, xi)) = -log d(x, xi)."""

    xi: float = 0.0

    code = _mc.OBS_LOG
    _shift_slot = 2

    def _raw_params(self, circle):
        return np.array([self.xi, float(circle), 0.0, 0.0, 0.0, 0.0])

    def _breakpoints(self):
        return [self.xi]

    def of_distance(self, d):
        return -np.log(d)


@dataclass(frozen=True)
class PowDist(Observable):
    """g2 = d^(-1/alpha) (``cls=2``) or g3 = D - d^(1/alpha) (``cls=3``)."""

    xi: float = 0.0
    alpha: float = 1.0
    cls: int = 2
    D: float = 1.0

    code = _mc.OBS_POWD
    _shift_slot = 2

    def __post_init__(self):
        if self.cls not in (2, 3):
            raise ParameterError("PowDist class must be 2 or 3")
        if not self.alpha > 0:
            raise ParameterError("alpha must be > 0")

    def _raw_params(self, circle):
        return np.array([self.xi, float(circle), 0.0, self.alpha, float(self.cls), self.D])

    def _breakpoints(self):
        return [self.xi]

    def of_distance(self, d):
        d = np.asarray(d, float)
        if self.cls == 2:
            with np.errstate(divide="ignore"):
                return d ** (-1.0 / self.alpha)
        return self.D - d ** (1.0 / self.alpha)


def zero_observable() -> HolderPower:
    """phi == 0, encoded as a power observable with zero scale."""
    return HolderPower(nu=1.0, center=0.0, scale=0.0)


def neutral_value(obs: Observable, spec: MapSpec) -> float:
    """Centered value of ``obs`` at the neutral fixed point (1 for T, -1 for S)."""
    x_star = 1.0 if spec.kind == "circle" else -1.0
    code, op = obs.encode(spec)
    return float(_mc.obs_value(code, op, x_star))


def sup_abs(obs: Observable, spec: MapSpec, grid: int = 20001) -> float:
    code, op = obs.encode(spec)
    x = np.linspace(-1.0, 1.0, grid)
    x = x[np.isfinite(x) & (x != getattr(obs, "xi", math.nan))]
    return float(np.max(np.abs(_mc.obs_apply(code, op, x))))
