"""Weighted empirical distributions and distances to reference laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, gammaln


@dataclass
class EmpiricalDist:
    """Sorted sample with normalized weights (equal weights by default)."""

    values: np.ndarray
    weights: np.ndarray
    meta: dict | None = None

    @classmethod
    def from_samples(cls, x, weights=None, meta=None) -> "EmpiricalDist":
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            raise ValueError("empty sample")
        w = np.ones(x.size) if weights is None else np.asarray(weights, float).ravel()
        if np.any(w < 0):
            raise ValueError("negative weight")
        order = np.argsort(x, kind="stable")
        return cls(x[order], w[order] / w.sum(), meta)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def cum(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def cdf(self, t):
        """Right-continuous step CDF."""
        idx = np.searchsorted(self.values, np.asarray(t, float), side="right")
        c = np.concatenate([[0.0], self.cum])
        return np.minimum(c[idx], 1.0)

    def survival(self, t):
        return 1.0 - self.cdf(t)

    def mean(self) -> float:
        v = self.values[np.isfinite(self.values)]
        w = self.weights[np.isfinite(self.values)]
        return float(np.sum(v * w) / np.sum(w))

    def var(self) -> float:
        m = self.mean()
        fin = np.isfinite(self.values)
        return float(np.sum(self.weights[fin] * (self.values[fin] - m) ** 2) / self.weights[fin].sum())

    def rms(self) -> float:
        fin = np.isfinite(self.values)
        return float(math.sqrt(np.sum(self.weights[fin] * self.values[fin] ** 2) / self.weights[fin].sum()))


def ks_distance(a: EmpiricalDist, b) -> float:
    """``sup_t |F_a(t) - F_b(t)|`` for a reference CDF callable ``b``.

    The sup of a step function against a continuous CDF is attained at a
    sample point from the left or the right, so both one-sided values are
    checked at every distinct sample value.
    """
    if a.n == 0:
        raise ValueError("empty distribution")
    vals, idx = np.unique(a.values, return_index=True)
    cum = np.concatenate([[0.0], a.cum])
    # weight mass up to and including each distinct value
    right = cum[np.searchsorted(a.values, vals, side="right")]
    left = cum[idx]
    ref = np.asarray(b(vals), dtype=float)
    fin = np.isfinite(vals)
    d = np.maximum(np.abs(right - ref), np.abs(left - ref))
    out = float(d[fin].max()) if fin.any() else 0.0
    if not fin.all():
        # +inf entries (censored) only matter through the left limit at +inf
        out = max(out, float(abs(cum[idx[~fin].min()] - 1.0)) if np.any(vals[~fin] > 0) else 0.0)
    return out


def tv_distance(p, q, k_max: int | None = None) -> float:
    """Half the l1 distance between two pmfs, optionally restricted to k <= k_max."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    n = max(p.size, q.size)
    pp = np.zeros(n)
    qq = np.zeros(n)
    pp[:p.size] = p
    qq[:q.size] = q
    if k_max is not None:
        pp, qq = pp[:k_max + 1], qq[:k_max + 1]
    return 0.5 * float(np.abs(pp - qq).sum())


def gaussian_cdf(sigma: float = 1.0, mu: float = 0.0):
    def F(t):
        z = (np.asarray(t, float) - mu) / (sigma * math.sqrt(2.0))
        return 0.5 * (1.0 + erf(z))
    return F


def exponential_cdf(t):
    t = np.asarray(t, float)
    return np.where(t > 0, -np.expm1(-np.maximum(t, 0.0)), 0.0)


def poisson_pmf(t: float, k_max: int) -> np.ndarray:
    k = np.arange(k_max + 1)
    return np.exp(k * math.log(t) - t - gammaln(k + 1)) if t > 0 else (k == 0).astype(float)


def gumbel_cdf(y):
    return np.exp(-np.exp(-np.asarray(y, float)))


def frechet_cdf(alpha: float):
    def F(y):
        y = np.asarray(y, float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(y > 0, np.exp(-np.power(np.maximum(y, 1e-300), -alpha)), 0.0)
    return F


def weibull_cdf(alpha: float):
    def F(y):
        y = np.asarray(y, float)
        return np.where(y <= 0, np.exp(-np.power(np.maximum(-y, 0.0), alpha)), 1.0)
    return F


def loglog_slope(n, y) -> tuple:
    """Least-squares slope of log y on log n and its standard error."""
    ln = np.log(np.asarray(n, float))
    ly = np.log(np.asarray(y, float))
    A = np.vstack([ln, np.ones_like(ln)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    dof = max(1, ln.size - 2)
    resid = ly - A @ coef
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / float(((ln - ln.mean()) ** 2).sum())) if ln.size > 2 else float("nan")
    return float(coef[0]), se
