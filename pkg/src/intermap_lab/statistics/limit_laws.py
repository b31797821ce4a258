"""Distributional limits of Birkhoff sums and large deviations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gamma as gamma_fn

from .. import _mc
from ..empirical import EmpiricalDist, gaussian_cdf, ks_distance, loglog_slope
from ..errors import ParameterError, StarvationError
from ..maps import MapSpec
from ..observables import Observable, neutral_value
from ..parallel import batch_rngs, blocks, run_batches, split_counts, uniform_starts
from ..stable import StableLaw
from ._common import default_burn_in, resolve_sampler

BLOCK = 4096


@dataclass(frozen=True)
class Normalization:
    """B_n = sqrt(n), n^e, or sqrt(n log n)."""

    kind: str = "sqrt"
    exponent: float = 0.5

    def __post_init__(self):
        if self.kind not in ("sqrt", "pow", "sqrtlog"):
            raise ParameterError(f"unknown normalization {self.kind!r}")

    def __call__(self, n: int) -> float:
        if self.kind == "sqrt":
            return math.sqrt(n)
        if self.kind == "pow":
            return float(n) ** self.exponent
        return math.sqrt(n * math.log(n))


SqrtN = Normalization("sqrt")
SqrtNLogN = Normalization("sqrtlog")


def NPow(e: float) -> Normalization:
    return Normalization("pow", float(e))


# ------------------------------------------------------------ raw sums

def _iid_sums(spec, fc, fp, checkpoints, counts, seed, workers):
    kind, prm = spec.code, spec.kernel_params()
    rngs = batch_rngs(seed, counts.size)

    def one(i):
        x0 = uniform_starts(rngs[i], int(counts[i]))
        parts = []
        nud = 0
        for lo, hi in blocks(x0.size, BLOCK):
            out, k = _mc.birkhoff_iid(kind, prm, fc, fp, x0[lo:hi], checkpoints)
            parts.append(out)
            nud += k
        return np.concatenate(parts, axis=1), nud

    res = run_batches(one, counts.size, workers)
    return np.concatenate([r[0] for r in res], axis=1), sum(r[1] for r in res)


def _orbit_sums(spec, fc, fp, n, count, seed, burn_in, centered):
    """S_n over consecutive windows of one long orbit."""
    kind, prm = spec.code, spec.kernel_params()
    rng = np.random.default_rng(seed)
    x = float(uniform_starts(rng, 1)[0])
    _, x, nud = _mc.orbit_values(kind, prm, x, burn_in, 0, fc, fp)
    sums = np.empty(count)
    chunk = max(1, 2**22 // n)
    done = 0
    total = 0.0
    while done < count:
        k = min(chunk, count - done)
        vals, x, kk = _mc.orbit_values(kind, prm, x, 0, k * n, fc, fp)
        nud += kk
        sums[done:done + k] = vals.reshape(k, n).sum(1)
        total += vals.sum()
        done += k
    if centered:
        sums -= n * total / (count * n)
    return sums, nud


def birkhoff_sums(spec: MapSpec, phi: Observable, n_list, samples: int, seed: int = 0,
                  batches: int = 16, workers: int = 1, sampler: str = "auto",
                  burn_in: int | None = None) -> tuple:
    """Raw S_n phi for every n in ``n_list`` (rows) and every sample (columns)."""
    checkpoints = np.array(sorted({int(v) for v in n_list}), dtype=np.int64)
    if checkpoints[0] < 1:
        raise ParameterError("n must be >= 1")
    mode = resolve_sampler(spec, sampler)
    if mode == "iid":
        fc, fp = phi.encode(spec)
        sums, nud = _iid_sums(spec, fc, fp, checkpoints, split_counts(samples, batches), seed, workers)
        return checkpoints, sums, nud
    fc, fp = phi.encode(spec, shift=0.0)
    rows = []
    nud = 0
    for j, n in enumerate(checkpoints):
        s, k = _orbit_sums(spec, fc, fp, int(n), samples, seed + j, default_burn_in(spec, burn_in),
                           phi.mean_subtracted)
        rows.append(s)
        nud += k
    return checkpoints, np.vstack(rows), nud


def birkhoff_normalized_sums(spec: MapSpec, phi: Observable, n: int, samples: int,
                             norm: Normalization = SqrtN, seed: int = 0, batches: int = 16,
                             workers: int = 1, sampler: str = "auto",
                             burn_in: int | None = None) -> EmpiricalDist:
    """Empirical law of S_n phi / B_n."""
    if n < 10**3:
        raise ParameterError("n must be >= 1e3")
    _, sums, nud = birkhoff_sums(spec, phi, [n], samples, seed, batches, workers, sampler, burn_in)
    return EmpiricalDist.from_samples(sums[0] / norm(n),
                                      meta={"n": n, "B_n": norm(n), "nudges": nud})


# ------------------------------------------------------------ reference laws

def fit_centered_gaussian(dist: EmpiricalDist) -> tuple:
    """(sigma, KS) of the N(0, sigma^2) closest to ``dist`` in KS distance."""
    s0 = dist.rms()
    if s0 == 0.0:
        return 0.0, ks_distance(dist, lambda t: (np.asarray(t) >= 0).astype(float))
    res = optimize.minimize_scalar(lambda s: ks_distance(dist, gaussian_cdf(s)),
                                   bounds=(0.5 * s0, 1.5 * s0), method="bounded",
                                   options={"xatol": 1e-5 * s0})
    return float(res.x), float(res.fun)


@dataclass
class StableConstants:
    p: float
    c1: float
    c2: float
    c_generic: float
    c_alt: float
    beta: float
    law: StableLaw
    notes: dict = field(default_factory=dict)


def stable_limit(spec: MapSpec, phi: Observable, rho0: float | None = None) -> StableConstants:
    """Index, tail constants and law of the stable limit of S_n phi / n^(1/p).

    Circle map: excursions near the neutral point 1 come from a neighbourhood
    of the cusp, and a laminar phase of length k contributes k * phi(1); this
    gives P(S > t) ~ c1 t^-p with c1 = (1/(2g)) (2g|phi(1)|/(g-1))^p. For the
    interval map the cusp at 0 feeds the neutral point -1 from both sides,
    giving c1 = 2 rho(0) a (|phi(-1)|/((g-1) a))^p with p = 1/(k(g-1)).

    ``c_alt`` is the alternative closed form (for the interval map it drops
    the factor 2 from the two sides of the cusp).
    """
    g = spec.gamma
    v = neutral_value(phi, spec)
    if v == 0.0:
        raise ParameterError("observable vanishes at the neutral point; the limit is Gaussian")
    if spec.kind == "circle":
        if not g > 2.0:
            raise ParameterError("stable limit requires gamma > 2 for the circle map")
        p = g / (g - 1.0)
        tot = (1.0 / (2 * g)) * (2 * g * abs(v) / (g - 1.0)) ** p
        alt = tot * gamma_fn(1.0 / (1.0 - g)) * math.cos(math.pi * g / (2 * (g - 1.0)))
    else:
        k, a, b = spec.params.kappa, spec.params.a, spec.params.b
        p = 1.0 / (k * (g - 1.0))
        if not 1.0 < p < 2.0:
            raise ParameterError("stable limit requires 1/(2(g-1)) < kappa < 1/(g-1)")
        if rho0 is None:
            raise ParameterError("interval map stable constant needs the density at 0")
        tot = 2.0 * rho0 * a * (abs(v) / ((g - 1.0) * a)) ** p
        alt = rho0 * (abs(v) / (a * b ** (g - 1.0) * (g - 1.0))) ** p * gamma_fn(1 - p) \
            * math.cos(math.pi * p / 2)
    c1, c2 = (tot, 0.0) if v > 0 else (0.0, tot)
    law = StableLaw.from_tails(p, c1, c2)
    return StableConstants(p, c1, c2, law.c, float(alt), law.beta, law,
                           {"phi_at_neutral": v, "rho0": rho0})


# ------------------------------------------------------------ large deviations

@dataclass
class LargeDeviationCurve:
    n: np.ndarray
    prob: np.ndarray
    stderr: np.ndarray
    exceed: np.ndarray
    samples: int
    eps: float
    zeta: float
    dropped: list
    nudges: int = 0

    def slope(self, n_lo: float | None = None, n_hi: float | None = None) -> tuple:
        sel = np.ones(self.n.size, bool)
        if n_lo is not None:
            sel &= self.n >= n_lo
        if n_hi is not None:
            sel &= self.n <= n_hi
        if sel.sum() < 2:
            raise StarvationError("fewer than two usable points for the slope fit")
        return loglog_slope(self.n[sel], self.prob[sel])


def ld_exponent(spec: MapSpec) -> float:
    g = spec.gamma
    if spec.kind == "circle":
        return 1.0 / (g - 1.0)
    k = spec.params.kappa
    return (1.0 - k * (g - 1.0)) / (k * (g - 1.0))


def large_deviation_curve(spec: MapSpec, phi: Observable, eps: float, n_list, samples: int,
                          seed: int = 0, batches: int = 16, workers: int = 1,
                          sampler: str = "auto", burn_in: int | None = None,
                          min_events: int = 10) -> LargeDeviationCurve:
    """P(|S_n phi / n| > eps) for each n, from one set of orbits with checkpoints.

    Points with fewer than ``min_events`` exceedances are dropped and listed
    in ``dropped``.
    """
    if not eps > 0:
        raise ParameterError("eps must be > 0")
    n_arr, sums, nud = birkhoff_sums(spec, phi, n_list, samples, seed, batches, workers,
                                     sampler, burn_in)
    hits = (np.abs(sums) > eps * n_arr[:, None]).sum(1)
    N = sums.shape[1]
    keep = (hits >= min_events) | (hits == 0) & np.all(sums == 0.0)
    dropped = [int(v) for v in n_arr[~keep]]
    prob = hits / N
    se = np.sqrt(prob * (1 - prob) / N)
    return LargeDeviationCurve(n_arr[keep], prob[keep], se[keep], hits[keep], N, eps,
                               ld_exponent(spec), dropped, int(nud))
