"""Invariant density of the interval map: occupation histograms and Ulam's method.

Ulam's matrix is assembled from exact preimage intervals: both branches of S
are monotone and onto, so the preimage of a cell [e_j, e_j+1] is
[h(e_j), h(e_j+1)] on the left branch and its mirror image on the right, and
its overlap with every cell is a plain interval intersection.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from . import _kernels as K
from . import _mc
from .empirical import loglog_slope
from .errors import NumericalError, ParameterError, StarvationError
from .maps import MapSpec
from .parallel import batch_rngs, run_batches, uniform_starts
from .partition import PartitionTable, _tail_sum_beyond, tail_measure


def require_interval(spec: MapSpec) -> None:
    if spec.kind != "interval":
        raise ParameterError("density requires interval map")
    k, g = spec.params.kappa, spec.params.gamma
    if not k * (g - 1.0) < 1.0:
        raise ParameterError("invariant density needs kappa * (gamma - 1) < 1")


@dataclass
class DensityEstimate:
    edges: np.ndarray
    masses: np.ndarray
    method: str
    counts: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.widths

    def cdf(self, x):
        """Piecewise-linear CDF through the cumulative bin masses."""
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        return np.interp(np.asarray(x, float), self.edges, cum)

    def mass_between(self, lo, hi):
        return self.cdf(hi) - self.cdf(lo)

    def value_at(self, x):
        j = np.clip(np.searchsorted(self.edges, np.asarray(x, float), side="right") - 1,
                    0, self.masses.size - 1)
        return self.density[j]

    def project(self, edges: np.ndarray) -> np.ndarray:
        """Masses on another set of edges."""
        return np.diff(self.cdf(edges))

    def l1_to_masses(self, reference_masses: np.ndarray) -> float:
        return float(np.abs(self.masses - reference_masses).sum())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "mass", "density"])
            for lo, hi, m, d in zip(self.edges[:-1], self.edges[1:], self.masses, self.density):
                w.writerow([repr(float(lo)), repr(float(hi)), repr(float(m)), repr(float(d))])


def uniform_edges(bins: int) -> np.ndarray:
    return np.linspace(-1.0, 1.0, int(bins) + 1)


def log_edges(spec: MapSpec, per_decade: int = 20, resolution: float = 1e-12) -> np.ndarray:
    """Log-spaced points accumulating at -1, 0 and 1.

    Near the fixed point -1 the inverse branch moves -1 + d by a d^gamma;
    cells stop where that shift falls to ``resolution`` (a few thousand ulps
    of 1), below which they would be absorbing in floating point.
    """
    p = spec.params
    d_min = max(1e-14, (resolution / p.a) ** (1.0 / p.gamma))

    def geo(lo):
        return np.logspace(np.log10(lo), 0.0, max(2, int(per_decade * -np.log10(lo)) + 1))[:-1]

    d1, d0 = geo(d_min), geo(1e-14)
    return np.concatenate([-1.0 + d1, 1.0 - d1, d0, -d0])


def partition_edges(table: PartitionTable, n_max: int, base_bins: int = 0,
                    per_decade: int = 20) -> np.ndarray:
    """Cell edges containing the partition points a_{+-n}, b_{+-n} (n <= n_max),
    0 and +-1, merged with a uniform grid and with log-spaced points at the
    special points (the last partition cells near -1 can carry a few percent
    of the mass when the density blows up there)."""
    n_max = min(int(n_max), table.N)
    pts = [table.a_plus[:n_max + 1], table.a_minus[:n_max + 1],
           table.b_plus[1:n_max + 1], table.b_minus[1:n_max + 1], np.array([-1.0, 0.0, 1.0])]
    if base_bins:
        pts.append(uniform_edges(base_bins))
    if per_decade:
        pts.append(log_edges(table.map, per_decade))
    e = np.unique(np.concatenate(pts))
    e = e[(e >= -1.0) & (e <= 1.0)]
    # drop edges closer than a few ulps, which would give empty cells
    keep = np.concatenate([[True], np.diff(e) > 4e-16])
    return e[keep]


# ------------------------------------------------------------------ histogram

def histogram_density(spec: MapSpec, bins: int = 1000, samples: int = 10**8,
                      burn_in: int = 10**6, seed: int = 0, edges: np.ndarray | None = None,
                      segments: int = 1, workers: int = 1) -> DensityEstimate:
    """Occupation histogram of ``segments`` orbits (each after its own burn-in)."""
    require_interval(spec)
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    edges = uniform_edges(bins) if edges is None else np.asarray(edges, float)
    kind, prm = spec.code, spec.kernel_params()
    rngs = batch_rngs(seed, segments)
    per = [samples // segments + (i < samples % segments) for i in range(segments)]

    def one(i):
        x = float(uniform_starts(rngs[i], 1)[0])
        c, _, nud = _mc.orbit_histogram(kind, prm, x, burn_in, per[i], edges)
        return c, nud

    res = run_batches(one, segments, workers)
    counts = np.sum([r[0] for r in res], axis=0)
    return DensityEstimate(edges, counts / counts.sum(), "histogram", counts,
                           {"samples": samples, "burn_in": burn_in, "segments": segments,
                            "nudges": int(sum(r[1] for r in res))})


# ------------------------------------------------------------------ Ulam

def _h(spec: MapSpec, y: np.ndarray) -> np.ndarray:
    p = spec.params
    return np.array([K.interval_h(float(v), p.kappa, p.gamma, p.a, p.b) for v in y])


def ulam_matrix(spec: MapSpec, edges: np.ndarray) -> sparse.csr_matrix:
    """Row-stochastic P[i, j] = m(B_i and S^-1 B_j) / m(B_i)."""
    require_interval(spec)
    edges = np.asarray(edges, float)
    n = edges.size - 1
    H = _h(spec, edges)                 # increasing, H[0] = -1, H[-1] = 0
    H[0], H[-1] = -1.0, 0.0
    rows, cols, vals = [], [], []
    for side in (-1, 1):
        pre = H if side < 0 else -H[::-1]   # preimage breakpoints on this branch
        lo, hi = (-1.0, 0.0) if side < 0 else (0.0, 1.0)
        cell_pts = edges[(edges > lo) & (edges < hi)]
        bp = np.unique(np.concatenate([pre, cell_pts, [lo, hi]]))
        mid = 0.5 * (bp[:-1] + bp[1:])
        ln = np.diff(bp)
        ok = ln > 0
        mid, ln = mid[ok], ln[ok]
        i = np.clip(np.searchsorted(edges, mid, side="right") - 1, 0, n - 1)
        if side < 0:
            j = np.searchsorted(H, mid, side="right") - 1
        else:
            j = np.searchsorted(H, -mid, side="right") - 1
        j = np.clip(j, 0, n - 1)
        rows.append(i)
        cols.append(j)
        vals.append(ln)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals) / np.diff(edges)[rows]
    P = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    P.sum_duplicates()
    return P


def stationary_vector(P: sparse.csr_matrix, tol: float = 1e-10, max_iter: int = 10**5) -> tuple:
    """Left fixed vector of a row-stochastic matrix: sparse direct solve, then
    power-iteration polish until ||vP - v||_1 <= tol."""
    n = P.shape[0]
    A = (P.T - sparse.identity(n, format="csr")).tolil()
    A[0, :] = np.ones(n)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    v = spsolve(A.tocsr(), rhs)
    v = np.maximum(v, 0.0)
    v /= v.sum()
    PT = P.T.tocsr()
    res = float(np.abs(PT @ v - v).sum())
    it = 0
    while res > tol and it < max_iter:
        v = PT @ v
        v /= v.sum()
        res = float(np.abs(PT @ v - v).sum())
        it += 1
    if res > tol:
        raise NumericalError(f"Ulam stationary vector did not converge (residual {res:.2e})")
    return v, res, it


def ulam_density(spec: MapSpec, cells: int = 2000, edges: np.ndarray | None = None,
                 tol: float = 1e-10) -> DensityEstimate:
    require_interval(spec)
    if edges is None:
        if cells < 100:
            raise ParameterError("cells must be >= 100")
        edges = uniform_edges(cells)
    P = ulam_matrix(spec, edges)
    v, res, it = stationary_vector(P, tol)
    return DensityEstimate(np.asarray(edges, float), v, "ulam", None,
                           {"residual": res, "polish_iterations": it, "cells": edges.size - 1})


def pushforward(spec: MapSpec, est: DensityEstimate) -> np.ndarray:
    """Masses of S_* est on the same cells (through the Ulam matrix)."""
    return ulam_matrix(spec, est.edges).T @ est.masses


# ------------------------------------------------------------------ references

def hemmer_density(x):
    return 0.5 * (1.0 - np.asarray(x, float))


def hemmer_masses(edges: np.ndarray) -> np.ndarray:
    F = lambda x: 0.5 * x - 0.25 * x * x
    e = np.asarray(edges, float)
    return F(e[1:]) - F(e[:-1])


def l1_cross(a: DensityEstimate, b: DensityEstimate) -> float:
    """L1 distance between two estimates on the common refinement of their cells."""
    e = np.unique(np.concatenate([a.edges, b.edges]))
    return float(np.abs(a.project(e) - b.project(e)).sum())


# ------------------------------------------------------------------ asymptotics

def density_exponents(spec: MapSpec) -> dict:
    """Predicted exponents (in the cylinder index n) of cylinder measures and densities."""
    k, g = spec.params.kappa, spec.params.gamma
    kg = k * (g - 1.0)
    return {
        "plus_one_measure": -(1 - k + k * g) / kg,
        "plus_one_density": -(1 - k) / kg,
        "minus_one_measure": -1.0 / kg,
        "minus_one_density": -(1 - k * g) / kg,
        "zero_measure": -1.0 / kg - 1.0,
        "zero_density": 0.0,
    }


def classify_minus_one(spec: MapSpec) -> str:
    k, g = spec.params.kappa, spec.params.gamma
    if math.isclose(k, 1.0 / g, rel_tol=1e-12):
        return "bounded"
    return "infinite" if k > 1.0 / g else "zero"


def _cylinder_masses(density: DensityEstimate, table: PartitionTable, n: np.ndarray) -> dict:
    ap, am, bp = table.a_plus, table.a_minus, table.b_plus
    return {
        "plus_one": (density.mass_between(ap[n - 1], ap[n]), ap[n] - ap[n - 1]),
        "minus_one": (density.mass_between(am[n], am[n - 1]), am[n - 1] - am[n]),
        "zero": (density.mass_between(bp[n + 1], bp[n]), bp[n] - bp[n + 1]),
    }


def cylinder_measure_exponents(spec: MapSpec, density: DensityEstimate, table: PartitionTable,
                               n_range: tuple = (10, 100), min_counts: int = 10) -> dict:
    """Fitted log-log slopes of cylinder measures and mean densities near +1, -1 and 0."""
    require_interval(spec)
    lo, hi = n_range
    if hi + 1 > table.N:
        raise ParameterError("n_range exceeds the partition depth")
    n = np.arange(lo, hi + 1)
    ref = density_exponents(spec)
    total = density.counts.sum() if density.counts is not None else None
    out = {"n_range": [int(lo), int(hi)], "method": density.method}
    for key, (mass, length) in _cylinder_masses(density, table, n).items():
        if total is not None:
            low = mass * total < min_counts
            if low.any():
                raise StarvationError(f"cylinder mass near {key} below {min_counts} counts "
                                      f"from n = {int(n[low][0])}")
        if np.any(mass <= 0):
            raise StarvationError(f"empty cylinder near {key}")
        sm, sm_se = loglog_slope(n, mass)
        sd, sd_se = loglog_slope(n, mass / length)
        out[key] = {"measure_slope": sm, "measure_se": sm_se,
                    "measure_reference": ref[f"{key}_measure"],
                    "density_slope": sd, "density_se": sd_se,
                    "density_reference": ref[f"{key}_density"]}
    out["minus_one_class"] = classify_minus_one(spec)
    out["rho0"] = density_at_zero(density, table)
    return out


def density_at_zero(density: DensityEstimate, table: PartitionTable, n: int | None = None) -> float:
    """Mean density on (b_{-n}, b_n), by default at the deepest partition edge
    the estimate resolves."""
    if n is None:
        inside = np.isin(table.b_plus[1:], density.edges)
        n = int(np.nonzero(inside)[0][-1]) + 1 if inside.any() else 20
    hi = float(table.b_plus[min(n, table.N)])
    return float(density.mass_between(-hi, hi) / (2 * hi))


def kac_check(density: DensityEstimate, table: PartitionTable, p_max: int | None = None) -> dict:
    """Sum over cylinders Z_p of I_0 of p * mu(Z_p), which equals 1 by Kac.

    Z_1 = (a_0-, b_-1) u (b_1, a_0+) and Z_p = (b_-p, b_-(p-1)) u (b_(p-1), b_p)
    for p > 1. Beyond p_max the cylinders sit next to 0 where the density is
    flat, so the remainder is their plain length times the density at 0.
    """
    P = table.N - 1 if p_max is None else min(int(p_max), table.N - 1)
    b = table.b_plus
    a0 = table.a_plus[0]
    C_r = float(density.mass_between(-a0, a0))
    edges_hi = np.concatenate([[a0], b[1:P + 1]])      # a0, b1, ..., bP
    mass = (density.mass_between(edges_hi[1:], edges_hi[:-1])
            + density.mass_between(-edges_hi[:-1], -edges_hi[1:]))
    p = np.arange(1, P + 1)
    head = float(np.sum(p * mass))
    # sum_{p > P} p m(Z_p) = P m(tau > P) + sum_{k >= P} m(tau > k), in plain length
    rho0 = density_at_zero(density, table)
    tail = float(rho0 * (P * tail_measure(table, 0, P) + tail_measure(table, 0, P)
                         + _tail_sum_beyond(table, 0, P)))
    mu_hat = mass / C_r
    return {"C_r": C_r, "head": head, "tail": tail, "total": head + tail,
            "C_r_times_sum": C_r * float(np.sum(p * mu_hat)) + tail, "p_max": P}
