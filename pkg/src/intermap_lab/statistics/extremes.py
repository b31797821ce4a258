"""Extreme value laws for M_n = max_{j<n} g(d(T^j x, xi)).

All three classes are decreasing functions of the distance, so M_n is
g(min_j d(T^j x, xi)) and only the minimal distance has to be tracked.
Normalizing sequences follow the quantile recipe: s_n solves
mu(d <= s_n) = 1/n, u_n = g(s_n) is the (1 - 1/n)-quantile of g(d), and

    G1 (-log d):        b_n = u_n, a_n = 1 / (n * density of g(d) at u_n)
    G2 (d^(-1/alpha)):  b_n = 0,   a_n = 1 / u_n
    G3 (D - d^(1/alpha)): b_n = D, a_n = 1 / (D - u_n)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .. import _mc
from ..empirical import EmpiricalDist, frechet_cdf, gumbel_cdf, weibull_cdf
from ..errors import ParameterError
from ..maps import MapSpec
from ..parallel import batch_rngs, blocks, run_batches, split_counts, uniform_starts
from ._common import default_burn_in, resolve_sampler
from .recurrence import ball_measure, check_ball

BLOCK = 8192


@dataclass(frozen=True)
class EVLClass:
    kind: str           # "G1", "G2", "G3"
    alpha: float = 1.0
    D: float = 1.0

    def __post_init__(self):
        if self.kind not in ("G1", "G2", "G3"):
            raise ParameterError(f"unknown EVL class {self.kind!r}")
        if not self.alpha > 0:
            raise ParameterError("alpha must be > 0")

    def g(self, d):
        d = np.asarray(d, float)
        if self.kind == "G1":
            return -np.log(d)
        if self.kind == "G2":
            return d ** (-1.0 / self.alpha)
        return self.D - d ** (1.0 / self.alpha)

    def reference(self):
        if self.kind == "G1":
            return gumbel_cdf
        if self.kind == "G2":
            return frechet_cdf(self.alpha)
        return weibull_cdf(self.alpha)


def G1() -> EVLClass:
    return EVLClass("G1")


def G2(alpha: float = 1.0) -> EVLClass:
    return EVLClass("G2", alpha)


def G3(alpha: float = 1.0, D: float = 1.0) -> EVLClass:
    return EVLClass("G3", alpha, D)


def _threshold_distance(spec, xi, n, density):
    """s_n with mu(B_{s_n}(xi)) = 1/n, and d mu(B_s)/ds at s_n."""
    if spec.kind == "circle":
        return 1.0 / n, 1.0
    F = lambda s: ball_measure(spec, xi, s, density)
    s = optimize.brentq(lambda s: F(s) - 1.0 / n, 1e-15, min(1 - abs(xi), abs(xi)) * 0.999,
                        xtol=1e-18, rtol=1e-13)
    h = 1e-3 * s
    return s, (F(s + h) - F(s - h)) / (2 * h)


def normalizing_constants(spec: MapSpec, xi: float, g: EVLClass, n: int, density=None) -> tuple:
    """(a_n, b_n, s_n)."""
    s, dens = _threshold_distance(spec, xi, n, density)
    if g.kind == "G1":
        # density of -log d at u = -log s is dens * s
        return 1.0 / (n * dens * s), -math.log(s), s
    if g.kind == "G2":
        return s ** (1.0 / g.alpha), 0.0, s
    return s ** (-1.0 / g.alpha), g.D, s


def normalized_from_distance(g: EVLClass, dmin: np.ndarray, s: float, a: float) -> np.ndarray:
    """a_n (g(dmin) - b_n) for the recipe constants, written as distance ratios
    so that G3 does not lose precision in D - (D - ...)."""
    dmin = np.asarray(dmin, float)
    if g.kind == "G1":
        return a * np.log(s / dmin)
    if g.kind == "G2":
        return (s / dmin) ** (1.0 / g.alpha)
    return -(dmin / s) ** (1.0 / g.alpha)


def min_distances(spec: MapSpec, xi: float, n: int, samples: int, seed: int = 0,
                  batches: int = 16, workers: int = 1, sampler: str = "auto",
                  burn_in: int | None = None) -> tuple:
    kind, prm = spec.code, spec.kernel_params()
    circle = spec.kind == "circle"
    mode = resolve_sampler(spec, sampler)
    if mode == "iid":
        counts = split_counts(samples, batches)
        rngs = batch_rngs(seed, batches)

        def one(i):
            x0 = uniform_starts(rngs[i], int(counts[i]))
            out, nud = [], 0
            for lo, hi in blocks(x0.size, BLOCK):
                d, k = _mc.min_distance_iid(kind, prm, x0[lo:hi], xi, circle, n)
                out.append(d)
                nud += k
            return np.concatenate(out), nud

        res = run_batches(one, batches, workers)
        return np.concatenate([r[0] for r in res]), sum(r[1] for r in res)
    rng = np.random.default_rng(seed)
    x = float(uniform_starts(rng, 1)[0])
    _, x, nud = _mc.orbit_values(kind, prm, x, default_burn_in(spec, burn_in), 0, 0, np.zeros(6))
    out = []
    per = max(1, 2**22 // n)
    done = 0
    while done < samples:
        k = min(per, samples - done)
        pts, kk = _mc.orbit_block(kind, prm, x, 0, k * n + 1)
        x = float(pts[-1])
        nud += kk
        out.append(_mc.block_min_distance(pts[:-1], xi, circle, n))
        done += k
    return np.concatenate(out), nud


def extreme_maxima_distribution(spec: MapSpec, xi: float, g: EVLClass, n: int, samples: int,
                                seed: int = 0, density=None, **kw) -> EmpiricalDist:
    """Empirical law of a_n (M_n - b_n) over ``samples`` independent blocks of length n."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    check_ball(spec, xi, 1.0 / n)
    a, b, s = normalizing_constants(spec, xi, g, n, density)
    dmin, nud = min_distances(spec, xi, n, samples, seed, **kw)
    y = normalized_from_distance(g, dmin, s, a)
    return EmpiricalDist.from_samples(y, meta={"a_n": a, "b_n": b, "s_n": s, "class": g.kind,
                                               "nudges": nud})
