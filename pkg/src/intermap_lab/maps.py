"""The two intermittent map families and their orbit machinery.

``T`` lives on the circle ``[-1, 1]/~`` and is given implicitly by

    x = (1/(2g)) (1 + T)^g          for 0 <= x <= 1/(2g)
    x = T + (1/(2g)) (1 - T)^g      for 1/(2g) <= x <= 1

extended to negative x by oddness. ``S`` is the even Lorenz-type map on
``[-1, 1]`` whose left branch is the inverse of

    h(y) = y - a (1 + y)^g              on [-1, 0]
    h(y) = -((1 - y) / b)^(1/k)         on [0, 1]

with ``a = k/(k g + 1)`` and ``b = a^(-k)`` so that the two pieces of ``h``
join in C^1. At ``(k, g) = (1/2, 2)`` this is the Hemmer map ``1 - 2 sqrt|x|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as K
from .errors import DomainError, ParameterError


class Branch(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class CircleParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ParameterError("gamma must be > 1")


@dataclass(frozen=True)
class IntervalParams:
    kappa: float
    gamma: float
    a: float = field(init=False)
    b: float = field(init=False)
    y0: float = field(init=False, default=0.0)

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ParameterError("gamma must be > 1")
        if not 0.0 < self.kappa < 1.0:
            raise ParameterError("kappa must lie in (0, 1)")
        a = self.kappa / (self.kappa * self.gamma + 1.0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", a ** (-self.kappa))


@dataclass(frozen=True)
class MapSpec:
    """One map instance plus solver settings.

    ``closed_form`` lets the bulk Monte Carlo kernels use ``2 sqrt(x) - 1`` /
    ``1 - 2 sqrt|x|`` when the parameters make the implicit equations
    explicit. The pointwise API (``evaluate``, ``eval_circle``, ...) always
    goes through the implicit solver.
    """

    params: CircleParams | IntervalParams
    solver_tol: float = 1e-14
    max_newton_iters: int = 50
    closed_form: bool = True

    def __post_init__(self):
        if not 1e-15 <= self.solver_tol <= 1e-10:
            raise ParameterError("solver_tol must lie in [1e-15, 1e-10]")
        if self.max_newton_iters < 1:
            raise ParameterError("max_newton_iters must be >= 1")

    @classmethod
    def circle(cls, gamma: float, **kw) -> "MapSpec":
        return cls(CircleParams(gamma), **kw)

    @classmethod
    def interval(cls, kappa: float, gamma: float, **kw) -> "MapSpec":
        return cls(IntervalParams(kappa, gamma), **kw)

    @classmethod
    def hemmer(cls, **kw) -> "MapSpec":
        return cls.interval(0.5, 2.0, **kw)

    @property
    def kind(self) -> str:
        return "circle" if isinstance(self.params, CircleParams) else "interval"

    @property
    def code(self) -> int:
        return K.CIRCLE if self.kind == "circle" else K.INTERVAL

    @property
    def gamma(self) -> float:
        return self.params.gamma

    def kernel_params(self, fast: bool | None = None) -> np.ndarray:
        prm = np.zeros(K.N_PRM)
        p = self.params
        prm[K.P_GAMMA] = p.gamma
        if isinstance(p, IntervalParams):
            prm[K.P_KAPPA] = p.kappa
            prm[K.P_A] = p.a
            prm[K.P_B] = p.b
        prm[K.P_FAST] = float(self.closed_form if fast is None else fast)
        prm[K.P_TOL] = self.solver_tol
        prm[K.P_MAXIT] = self.max_newton_iters
        return prm

    def describe(self) -> dict:
        p = self.params
        if self.kind == "circle":
            return {"kind": "circle", "gamma": p.gamma}
        return {"kind": "interval", "kappa": p.kappa, "gamma": p.gamma}


@dataclass
class Orbit:
    start: float
    length: int
    final: float
    points: np.ndarray | None = None
    nudges: int = 0


def _as_spec(obj, tol=1e-14, maxit=50) -> MapSpec:
    if isinstance(obj, MapSpec):
        return obj
    return MapSpec(obj, solver_tol=tol, max_newton_iters=maxit)


def _check_domain(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(np.abs(arr) <= 1.0)):
        raise DomainError("x must lie in [-1, 1]")
    return arr


def _apply(spec: MapSpec, x):
    arr = _check_domain(x)
    out = K.apply_map(spec.code, spec.kernel_params(fast=False), np.atleast_1d(arr).ravel())
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def evaluate(spec: MapSpec, x):
    """Map value at ``x`` (scalar or array) via the implicit solver."""
    return _apply(spec, x)


def eval_circle(params: CircleParams | MapSpec, x):
    """T(x). At the cusp the sign of zero selects the side: T(+0) = -1, T(-0) = +1."""
    spec = _as_spec(params)
    if spec.kind != "circle":
        raise ParameterError("eval_circle needs circle parameters")
    return _apply(spec, x)


def eval_interval(params: IntervalParams | MapSpec, x):
    spec = _as_spec(params)
    if spec.kind != "interval":
        raise ParameterError("eval_interval needs interval parameters")
    return _apply(spec, x)


def _derivs(spec: MapSpec, x, order: int):
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    arr = _check_domain(x)
    if np.any(arr == 0.0):
        raise DomainError("derivative diverges at the cusp x = 0")
    flat = np.atleast_1d(arr).ravel()
    d1, d2 = K.apply_derivs(spec.code, spec.kernel_params(fast=False), flat)
    out = d1 if order == 1 else d2
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def deriv_circle(params: CircleParams | MapSpec, x, order: int = 1):
    """DT or D^2T by implicit differentiation; DT is even, D^2T is odd."""
    spec = _as_spec(params)
    if spec.kind != "circle":
        raise ParameterError("deriv_circle needs circle parameters")
    return _derivs(spec, x, order)


def deriv_interval(params: IntervalParams | MapSpec, x, order: int = 1):
    spec = _as_spec(params)
    if spec.kind != "interval":
        raise ParameterError("deriv_interval needs interval parameters")
    return _derivs(spec, x, order)


def derivative(spec: MapSpec, x, order: int = 1):
    return _derivs(spec, x, order)


def invert_branch(spec: MapSpec, branch: Branch | str, y):
    """Unique preimage of ``y`` on the given monotone branch.

    Circle: RIGHT is ``T`` restricted to (0, 1], LEFT to [-1, 0).
    Interval: LEFT is the increasing branch on [-1, 0], RIGHT the decreasing
    one on [0, 1]. Both branches of either map are onto [-1, 1].
    """
    branch = Branch(branch)
    yv = np.asarray(y, dtype=float)
    if np.any(~(np.abs(yv) <= 1.0)):
        raise DomainError("y outside the branch image [-1, 1]")
    p = spec.params
    if spec.kind == "circle":
        f = np.vectorize(lambda t: K.circle_preimage_right(t, p.gamma), otypes=[float])
        out = f(yv) if branch is Branch.RIGHT else -f(-yv)
    else:
        f = np.vectorize(lambda t: K.interval_h(t, p.kappa, p.gamma, p.a, p.b), otypes=[float])
        out = f(yv) if branch is Branch.LEFT else -f(yv)
    return float(out) if out.ndim == 0 else out


def periodic_points(spec: MapSpec, max_period: int, sweeps: int = 200,
                    tol: float = 1e-13) -> np.ndarray:
    """Sorted periodic points of period <= ``max_period``, neutral points excluded.

    Each branch word of length k has one fixed point of the composed inverse
    branches, reached by backward iteration (a contraction away from the
    neutral points). Words whose iteration does not settle are the ones
    attracted to a neutral point and are dropped.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    found = []
    for k in range(1, max_period + 1):
        words = (np.arange(2**k)[:, None] >> np.arange(k)[::-1]) & 1  # 1 = RIGHT
        x = np.zeros(2**k)
        for _ in range(sweeps):
            prev = x.copy()
            for j in range(k - 1, -1, -1):
                right = words[:, j] == 1
                x[right] = invert_branch(spec, Branch.RIGHT, x[right])
                x[~right] = invert_branch(spec, Branch.LEFT, x[~right])
            if np.all(np.abs(x - prev) <= tol):
                break
        settled = (np.abs(x - prev) <= tol) & (np.abs(x) < 1.0)
        found.append(x[settled])
    pts = np.sort(np.concatenate(found))
    return pts[np.concatenate([[True], np.diff(pts) > 1e-10])]


def iterate_orbit(spec: MapSpec, x0: float, n: int, store: bool = False) -> Orbit:
    """Apply the map ``n`` times (implicit solver, nudging exact zeros)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not -1.0 <= x0 <= 1.0:
        raise DomainError("x0 must lie in [-1, 1]")
    prm = spec.kernel_params(fast=False)
    if store:
        pts, nudges = K.orbit_points(spec.code, prm, float(x0), int(n))
        return Orbit(x0, n, float(pts[-1]), pts, int(nudges))
    final, nudges = K.orbit_final(spec.code, prm, float(x0), int(n))
    return Orbit(x0, n, float(final), None, int(nudges))


@dataclass
class LyapunovEstimate:
    value: float
    stderr: float
    samples: int
    n: int
    nudges: int = 0


def lyapunov_estimate(spec: MapSpec, samples: int, n: int, seed: int,
                      burn_in: int | None = None) -> LyapunovEstimate:
    """Mean of per-orbit Birkhoff averages of log|D map| from uniform starts.

    Lebesgue measure is invariant for the circle map so no burn-in is used
    there; for the interval map a burn-in (default 1000 steps) precedes the
    averaging window.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 1:
        raise ValueError("n >= 1 required")
    if burn_in is None:
        burn_in = 0 if spec.kind == "circle" else 1000
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1.0, 1.0, size=samples)
    vals, nudges = K.lyapunov_orbits(spec.code, spec.kernel_params(), x0, int(n), int(burn_in))
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return LyapunovEstimate(float(vals.mean()), se, samples, n, int(nudges))
