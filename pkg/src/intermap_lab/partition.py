"""Countable Markov partitions, first-return maps and distortion scans.

Partition quantities are measured in plain length (total mass 2 on
[-1, 1]); probabilities elsewhere in the package use the normalized measure.

Endpoints near the neutral points are built from the distances
``u_n = 1 - a_n`` (circle) or ``v_n = 1 + a_{-n}`` (interval), which obey
``u_{n+1} = u_n - c u_n^g`` exactly, so deep tables keep relative accuracy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate

from . import _kernels as K
from .errors import CapExceeded, DepthError, DomainError
from .maps import MapSpec


@dataclass(frozen=True)
class PartitionTable:
    """Endpoints ``a_{+-n}`` (n = 0..N), ``b_{+-n}`` (n = 1..N), lengths ``l_n``.

    ``u[n] = 1 - a_plus[n]`` is kept alongside because ``a_plus`` saturates
    at 1 long before ``u`` loses precision. Index 0 of ``b_plus`` is unused
    (NaN) so that ``b_plus[n]`` is ``b_n``.
    """

    map: MapSpec
    N: int
    a_plus: np.ndarray
    a_minus: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    u: np.ndarray

    @property
    def l(self) -> np.ndarray:
        """``l[n] = |a_n - a_{n-1}|`` for n >= 1 (l[0] is NaN)."""
        out = np.full(self.N + 1, np.nan)
        out[1:] = self.u[:-1] - self.u[1:]
        return out

    def b(self, n: int) -> float:
        if n < 1 or n > self.N:
            raise DepthError(f"b_{n} outside table depth {self.N}")
        return float(self.b_plus[n])

    def to_csv(self, path) -> None:
        l = self.l
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "a_n", "a_minus_n", "b_n", "b_minus_n", "l_n"])
            for n in range(self.N + 1):
                w.writerow([n, repr(float(self.a_plus[n])), repr(float(self.a_minus[n])),
                            "" if n == 0 else repr(float(self.b_plus[n])),
                            "" if n == 0 else repr(float(self.b_minus[n])),
                            "" if n == 0 else repr(float(l[n]))])


@njit(cache=True)
def _escape_distances(u0, coef, gamma, N):
    u = np.empty(N + 1)
    u[0] = u0
    for n in range(N):
        u[n + 1] = u[n] - coef * u[n] ** gamma
    return u


def build_partition(spec: MapSpec, N: int) -> PartitionTable:
    """Partition endpoints to depth ``N``.

    Circle: ``a_0 = 1/(2g)``, ``a_{n+1} = a_n + (1/(2g))(1 - a_n)^g``,
    ``T(b_n) = a_{-(n-1)}`` on the positive branch. Interval:
    ``a_{0-} = -a``, ``a_{-p} = S_1^{-p} a_{0-}``, ``a_p = -a_{-p}`` and
    ``S(b_p) = a_{p-1}`` with ``b_p`` in (0, a_{0+}).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    p = spec.params
    g = p.gamma
    if spec.kind == "circle":
        coef = 0.5 / g
        u = _escape_distances(1.0 - coef, coef, g, N)
        b = np.full(N + 1, np.nan)
        b[1:] = coef * u[:-1] ** g
    else:
        coef = p.a
        u = _escape_distances(1.0 - p.a, coef, g, N)
        b = np.full(N + 1, np.nan)
        b[1:] = (u[:-1] / p.b) ** (1.0 / p.kappa)
    a_plus = 1.0 - u
    _check_depth(a_plus, b, N)
    return PartitionTable(spec, N, a_plus, -a_plus, b, -b, u)


def _check_depth(a_plus, b, N):
    da = np.diff(a_plus)
    bad_a = np.nonzero(da <= 0.0)[0]
    db = np.diff(b[1:])
    bad_b = np.nonzero(~(db < 0.0) | (b[2:] <= 0.0))[0]
    worst = min([N] + [int(i) for i in bad_a[:1]] + [int(i) + 1 for i in bad_b[:1]])
    if worst < N:
        raise DepthError(f"partition depth {N} not resolvable in double precision; "
                         f"max achievable N = {worst}")


# ----------------------------------------------------------------- scaling

def _reference_constants(spec: MapSpec) -> dict:
    p = spec.params
    g = p.gamma
    if spec.kind == "circle":
        base = 2.0 * g / (g - 1.0)
        return {
            "one_minus_a": base ** (1.0 / (g - 1.0)),
            "l": base ** (g / (g - 1.0)) / (2.0 * g),
            "b": base ** (g / (g - 1.0)) / (2.0 * g),
        }
    a, b, k = p.a, p.b, p.kappa
    base = 1.0 / (a * (g - 1.0))
    return {
        "one_minus_a": base ** (1.0 / (g - 1.0)),
        "l": a * base ** (g / (g - 1.0)),
        "b": (1.0 / (a * b ** (g - 1.0) * (g - 1.0))) ** (1.0 / (k * (g - 1.0))),
    }


def exponents(spec: MapSpec) -> dict:
    """Power-law exponents of 1 - a_n, l_n and b_n in n."""
    p = spec.params
    g = p.gamma
    e_b = g / (g - 1.0) if spec.kind == "circle" else 1.0 / (p.kappa * (g - 1.0))
    return {"one_minus_a": 1.0 / (g - 1.0), "l": g / (g - 1.0), "b": e_b}


def scaling_constants(table: PartitionTable, n: int | None = None) -> dict:
    """Rescaled endpoint quantities at ``n`` (default N) and their reference values.

    The circle ``b`` constant is reported for ``|b_{n+1}|`` against ``n``,
    the interval one for ``b_n`` against ``n``, matching how each asymptotic
    is usually written.
    """
    n = table.N if n is None else n
    if n < 2 or n > table.N:
        raise DepthError(f"n = {n} outside table depth {table.N}")
    ex = exponents(table.map)
    ref = _reference_constants(table.map)
    l = table.l
    if table.map.kind == "circle":
        b_val = table.b_plus[n] if n == table.N else table.b_plus[n + 1]
        b_n = n - 1 if n == table.N else n
    else:
        b_val, b_n = table.b_plus[n], n
    meas = {
        "one_minus_a": n ** ex["one_minus_a"] * table.u[n],
        "l": n ** ex["l"] * l[n],
        "b": b_n ** ex["b"] * b_val,
    }
    return {k: {"value": float(meas[k]), "reference": float(ref[k]),
                "rel_dev": float(meas[k] / ref[k] - 1.0)} for k in meas}


# --------------------------------------------------------------- cylinders

@dataclass(frozen=True)
class Cylinder:
    m: int
    p: int
    side: str  # "plus" | "minus"
    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> np.ndarray:
        return (np.asarray(x) > self.lo) & (np.asarray(x) < self.hi)


def cylinder(table: PartitionTable, m: int, p: int, side: str = "plus") -> Cylinder:
    """``Z_{m,p}`` component: ``(b_{m+1}, a_m)`` for p = 1, ``(b_{m+p}, b_{m+p-1})`` after."""
    if m < 0 or p < 1:
        raise ValueError("need m >= 0 and p >= 1")
    if m + p > table.N:
        raise DepthError(f"Z_({m},{p}) needs depth {m + p} > {table.N}")
    if p == 1:
        lo, hi = table.b_plus[m + 1], table.a_plus[m]
    else:
        lo, hi = table.b_plus[m + p], table.b_plus[m + p - 1]
    lo, hi = float(lo), float(hi)
    if side == "minus":
        lo, hi = -hi, -lo
    return Cylinder(m, p, side, lo, hi)


@dataclass
class InducedMap:
    base: PartitionTable
    m: int
    cylinders: list
    p_max: int

    @property
    def tail_length(self) -> float:
        """Plain length of the uncovered set ``(b_{-(m+P)}, b_{m+P})``."""
        return 2.0 * float(self.base.b_plus[self.m + self.p_max])


def induced_map(table: PartitionTable, m: int, p_max: int) -> InducedMap:
    cyl = [cylinder(table, m, p, s) for p in range(1, p_max + 1) for s in ("plus", "minus")]
    return InducedMap(table, m, cyl, p_max)


def inducing_set(table: PartitionTable, m: int) -> tuple:
    if m > table.N:
        raise DepthError(f"I_{m} beyond table depth")
    return float(table.a_minus[m]), float(table.a_plus[m])


@njit(cache=True)
def _first_return(kind, prm, x, lo, hi, cap):
    y = x
    for p in range(1, cap + 1):
        y, _ = K.advance(kind, prm, y)
        if lo < y < hi and y != 0.0:
            return p, y
    return -1, y


def first_return(spec: MapSpec, m: int, x: float, table: PartitionTable | None = None,
                 cap: int = 10**7) -> tuple:
    """Return time ``p`` of ``x`` to ``I_m`` and the re-entry point."""
    if table is None:
        table = build_partition(spec, max(m, 1))
    lo, hi = inducing_set(table, m)
    if not (lo < x < hi) or x == 0.0:
        raise DomainError(f"x = {x} is not in I_{m} \\ {{0}}")
    p, y = _first_return(spec.code, spec.kernel_params(fast=False), float(x), lo, hi, int(cap))
    if p < 0:
        orbit = K.orbit_points(spec.code, spec.kernel_params(fast=False), float(x), min(cap, 10_000))[0]
        raise CapExceeded(f"no return to I_{m} within {cap} steps", orbit)
    return int(p), float(y)


def tail_measure(table: PartitionTable, m: int, n: int) -> float:
    """Plain length of ``{x in I_m : tau(x) > n}`` = ``|(b_{-(m+n)}, b_{m+n})|``."""
    if n < 0 or m < 0:
        raise ValueError("m, n must be >= 0")
    if n == 0:
        return 2.0 * float(table.a_plus[m])
    if m + n > table.N:
        raise DepthError(f"tail at m+n = {m + n} beyond table depth {table.N}")
    return 2.0 * float(table.b_plus[m + n])


# -------------------------------------------------------------- distortion

@njit(cache=True)
def _pair_scan(kind, prm, xs, ys, p):
    n = xs.size
    quot = np.full(n, np.nan)
    raw = np.empty(n)
    for i in range(n):
        tx, _, _, lx = K.iterate_derivs(kind, prm, xs[i], p)
        ty, _, _, ly = K.iterate_derivs(kind, prm, ys[i], p)
        dl = abs(lx - ly)
        raw[i] = math.exp(dl)
        dt = abs(tx - ty)
        if dt >= 1e-12:
            quot[i] = dl / dt
    return quot, raw


def _endpoint_biased(rng, lo, hi, k):
    # arcsine-distributed fractions pile up at both endpoints
    w = np.sin(0.5 * math.pi * rng.uniform(0.0, 1.0, size=k)) ** 2
    fr = np.concatenate([w, [1e-9, 1e-6, 1e-3, 1 - 1e-3, 1 - 1e-6, 1 - 1e-9]])
    return lo + (hi - lo) * np.clip(fr, 1e-12, 1 - 1e-12)


@dataclass
class DistortionScan:
    K_hat: float
    worst_ratio: float
    K_by_p: np.ndarray  # running sup, index p-1
    sup_by_p: np.ndarray  # per-cylinder sup
    pairs: int
    skipped: int

    def K_at(self, p: int) -> float:
        return float(self.K_by_p[p - 1])


def distortion_scan(spec: MapSpec, m: int, p_max: int, pairs_per_cylinder: int,
                    seed: int, table: PartitionTable | None = None,
                    return_pairs: bool = False):
    """Empirical distortion constant over ``Z_{m,p}``, p = 1..p_max.

    For every sampled pair (same-side and cross-side) the quotient
    ``|log DT^p(x) - log DT^p(y)| / |T^p x - T^p y|`` is formed; ``K_hat``
    is the sup over all cylinders and ``K_by_p`` the running sup in p.
    Pairs whose images are closer than 1e-12 are skipped.
    """
    if m < 0 or p_max < 1:
        raise ValueError("need m >= 0 and p_max >= 1")
    if table is None or table.N < m + p_max + 1:
        table = build_partition(spec, m + p_max + 1)
    rng = np.random.default_rng(seed)
    prm = spec.kernel_params(fast=False)
    sup_by_p = np.zeros(p_max)
    worst = 1.0
    skipped = total = 0
    kept = []
    for p in range(1, p_max + 1):
        zp = cylinder(table, m, p, "plus")
        pts = _endpoint_biased(rng, zp.lo, zp.hi, pairs_per_cylinder)
        other = _endpoint_biased(rng, zp.lo, zp.hi, pairs_per_cylinder)
        k = pts.size
        half = k // 2
        # first half same-side pairs, second half cross-side (y reflected)
        ys = other.copy()
        ys[half:] = -ys[half:]
        quot, raw = _pair_scan(spec.code, prm, pts, ys, p)
        ok = ~np.isnan(quot)
        skipped += int((~ok).sum())
        total += k
        sup_by_p[p - 1] = float(quot[ok].max()) if ok.any() else 0.0
        worst = max(worst, float(raw.max()))
        if return_pairs:
            kept.append((p, pts, ys))
    scan = DistortionScan(float(sup_by_p.max()), worst, np.maximum.accumulate(sup_by_p),
                          sup_by_p, total, skipped)
    return (scan, kept) if return_pairs else scan


def pair_log_ratio(spec: MapSpec, x, y, p: int) -> tuple:
    """(|log DT^p(x) - log DT^p(y)|, |T^p x - T^p y|) for arrays of pairs."""
    prm = spec.kernel_params(fast=False)
    xs = np.atleast_1d(np.asarray(x, float))
    ys = np.atleast_1d(np.asarray(y, float))
    dl = np.empty(xs.size)
    dt = np.empty(xs.size)
    for i in range(xs.size):
        tx, _, _, lx = K.iterate_derivs(spec.code, prm, xs[i], p)
        ty, _, _, ly = K.iterate_derivs(spec.code, prm, ys[i], p)
        dl[i] = abs(lx - ly)
        dt[i] = abs(tx - ty)
    return dl, dt


# --------------------------------------------------------------- variation

def induced_derivatives(spec: MapSpec, x: float, p: int) -> tuple:
    """(T^p x, DT^p(x), D^2T^p(x)) along the orbit."""
    y, d1, d2, _ = K.iterate_derivs(spec.code, spec.kernel_params(fast=False), float(x), p)
    return y, d1, d2


@dataclass
class VariationCheck:
    total: float
    increments: np.ndarray  # summand for p = 1..p_max
    integrals: np.ndarray
    sups: np.ndarray

    @property
    def last_increment(self) -> float:
        return float(self.increments[-1])


def variation_check(spec: MapSpec, m: int, p_max: int, table: PartitionTable | None = None,
                    grid: int = 64) -> VariationCheck:
    """Truncated bound ``sum_p [int_Z |D^2 T^| / |DT^|^2 + 2 sup_Z 1/|DT^|]``.

    Both components of each ``Z_{m,p}`` contribute (equal by symmetry, so
    the plus side is doubled). The integral uses adaptive quadrature with
    absolute tolerance 1e-10 per cylinder.
    """
    if m < 0 or p_max < 1:
        raise ValueError("need m >= 0 and p_max >= 1")
    if table is None or table.N < m + p_max + 1:
        table = build_partition(spec, m + p_max + 1)
    prm = spec.kernel_params(fast=False)
    code = spec.code

    integrals = np.empty(p_max)
    sups = np.empty(p_max)
    for p in range(1, p_max + 1):
        z = cylinder(table, m, p, "plus")

        def integrand(t, p=p):
            _, d1, d2, _ = K.iterate_derivs(code, prm, t, p)
            return abs(d2) / (d1 * d1)

        width = z.hi - z.lo
        val, _ = integrate.quad(integrand, z.lo, z.hi, epsabs=1e-10 * width,
                                epsrel=1e-10, limit=200)
        ts = z.lo + width * np.concatenate([[1e-12], (np.arange(1, grid) / grid), [1 - 1e-12]])
        inv = [1.0 / abs(K.iterate_derivs(code, prm, t, p)[1]) for t in ts]
        integrals[p - 1] = 2.0 * val
        sups[p - 1] = 2.0 * max(inv)
    inc = integrals + 2.0 * sups
    return VariationCheck(float(inc.sum()), inc, integrals, sups)


def kac_sum(table: PartitionTable, m: int = 0, p_max: int | None = None) -> dict:
    """``sum_p p * length(Z_{m,p})`` by brute force over the table.

    Beyond ``p_max`` the remaining mass is added as ``sum_{k >= P} tail``
    extended with the power-law asymptotic of ``b_n`` (flagged).
    """
    p_max = table.N - m if p_max is None else p_max
    lengths = np.array([2.0 * cylinder(table, m, p).length for p in range(1, p_max + 1)])
    head = float(np.sum(np.arange(1, p_max + 1) * lengths))
    # p * len(Z_p) summed past P equals P*tail(P) + sum_{k>=P} tail(k)
    tail_P = tail_measure(table, m, p_max)
    rest = tail_P + _tail_sum_beyond(table, m, p_max)
    return {"head": head, "tail": p_max * tail_P + rest, "total": head + p_max * tail_P + rest,
            "extrapolated": True}


def _tail_sum_beyond(table: PartitionTable, m: int, n: int) -> float:
    """``sum_{k > n} tail_measure(m, k)``, table first, asymptotic beyond N."""
    j0 = m + n + 1
    s = 2.0 * float(np.sum(table.b_plus[j0:table.N + 1])) if j0 <= table.N else 0.0
    e = exponents(table.map)["b"]
    # fit constant from the deepest table entry, then integrate the power law
    jn = table.N
    C = table.b_plus[jn] * jn ** e
    start = max(j0, jn + 1)
    # Euler-Maclaurin: sum_{j>=start} C j^-e ~ C[start^(1-e)/(e-1) + start^-e/2]
    s += 2.0 * C * (start ** (1.0 - e) / (e - 1.0) + 0.5 * start ** (-e))
    return s
