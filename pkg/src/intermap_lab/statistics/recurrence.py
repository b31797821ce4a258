"""Return times, hitting times and visit counts for small balls.

Times are rescaled by the invariant measure of the ball, so the limit laws
are exp(1) for return and hitting times and Poisson(t) for visit counts.
Orbits that have not entered the ball after ``cap_factor / mu(B)`` steps are
censored and enter the empirical law at +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _mc
from ..empirical import EmpiricalDist, poisson_pmf, tv_distance
from ..errors import DomainError, ParameterError
from ..maps import MapSpec
from ..parallel import batch_rngs, blocks, run_batches, split_counts, uniform_starts
from ._common import default_burn_in, resolve_sampler

BLOCK = 8192
CAP_FACTOR = 50.0


def check_ball(spec: MapSpec, center: float, r: float, margin: float = 10.0) -> None:
    """Reject balls that are not small and generic relative to the special points."""
    if not 0.0 < r < 0.1:
        raise ParameterError("radius must lie in (0, 0.1)")
    if not -1.0 < center < 1.0:
        raise DomainError("center must lie in (-1, 1)")
    if abs(center) < margin * r:
        raise DomainError("center too close to the cusp 0 relative to r")
    if 1.0 - abs(center) < margin * r:
        raise DomainError("center too close to the neutral point relative to r")


def ball_measure(spec: MapSpec, center: float, r: float, density=None) -> float:
    """Invariant measure of B_r(center).

    Exact for the circle map (normalized Lebesgue) and for the Hemmer map
    (density (1-x)/2); otherwise integrated from a density estimate.
    """
    lo, hi = center - r, center + r
    if spec.kind == "circle":
        return r
    p = spec.params
    if p.kappa == 0.5 and p.gamma == 2.0 and density is None:
        F = lambda x: 0.5 * x - 0.25 * x * x
        return F(hi) - F(lo)
    if density is None:
        raise ParameterError("ball measure for this interval map needs a density estimate")
    return float(density.mass_between(lo, hi))


@dataclass
class RecurrenceSample:
    """First (re)entry times in steps plus visit counts within a horizon."""

    tau: np.ndarray           # -1 = censored
    visits: np.ndarray | None
    mu: float
    cap: int
    horizon: int
    nudges: int = 0

    def rescaled(self) -> np.ndarray:
        t = self.tau.astype(float) * self.mu
        t[self.tau < 0] = np.inf
        return t

    def dist(self, kind: str) -> EmpiricalDist:
        t = self.rescaled()
        return EmpiricalDist.from_samples(t, meta={"kind": kind, "mu": self.mu, "cap": self.cap,
                                                   "censored": int((self.tau < 0).sum()),
                                                   "nudges": self.nudges})


def _ball_starts(rng, center, r, count, circle):
    x = center + rng.uniform(-r, r, size=count)
    if circle:
        x = np.where(x > 1.0, x - 2.0, np.where(x < -1.0, x + 2.0, x))
    return x


def _iid_recurrence(spec, center, r, samples, seed, start, horizon, batches, workers, cap):
    kind, prm = spec.code, spec.kernel_params()
    circle = spec.kind == "circle"
    counts = split_counts(samples, batches)
    rngs = batch_rngs(seed, batches)

    def one(i):
        n = int(counts[i])
        x0 = _ball_starts(rngs[i], center, r, n, circle) if start == "ball" \
            else uniform_starts(rngs[i], n)
        taus, vis = [], []
        nud = 0
        for lo, hi in blocks(n, BLOCK):
            t, v, k = _mc.entry_iid(kind, prm, x0[lo:hi], center, r, circle, cap, horizon)
            taus.append(t)
            vis.append(v)
            nud += k
        return np.concatenate(taus), np.concatenate(vis), nud

    res = run_batches(one, batches, workers)
    return (np.concatenate([a[0] for a in res]), np.concatenate([a[1] for a in res]),
            sum(a[2] for a in res))


def _orbit_recurrence(spec, center, r, samples, seed, start, horizon, mu, cap, burn_in):
    """Entry times read off one long orbit: gaps between visits (returns) or
    waits from evenly spaced start indices (hitting)."""
    kind, prm = spec.code, spec.kernel_params()
    rng = np.random.default_rng(seed)
    x = float(uniform_starts(rng, 1)[0])
    _, x, nud = _mc.orbit_values(kind, prm, x, burn_in, 0, 0, np.zeros(6))
    need = int(math.ceil(samples / mu * 1.2)) + cap + horizon
    pts, k = _mc.orbit_block(kind, prm, x, 0, need)
    nud += k
    hits = _mc.visit_times(pts, center, r, False)
    if start == "ball":
        if hits.size < samples + 1:
            raise ParameterError("orbit too short for the requested number of returns")
        origins = hits[:samples]
    else:
        stride = max(1, (need - cap - horizon) // samples)
        origins = np.arange(samples, dtype=np.int64) * stride
    nxt = np.searchsorted(hits, origins, side="right")
    tau = np.full(samples, -1, dtype=np.int64)
    ok = nxt < hits.size
    tau[ok] = hits[nxt[ok]] - origins[ok]
    tau[tau > cap] = -1
    # visits in (origin, origin + horizon]
    last = np.searchsorted(hits, origins + horizon, side="right")
    visits = last - nxt
    return tau, visits, nud


def recurrence_sample(spec: MapSpec, center: float, r: float, samples: int, seed: int = 0,
                      start: str = "ball", horizon: int = 0, batches: int = 16, workers: int = 1,
                      sampler: str = "auto", density=None, cap_factor: float = CAP_FACTOR,
                      burn_in: int | None = None) -> RecurrenceSample:
    check_ball(spec, center, r)
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    mu = ball_measure(spec, center, r, density)
    cap = int(math.ceil(cap_factor / mu))
    mode = resolve_sampler(spec, sampler)
    if mode == "iid":
        tau, vis, nud = _iid_recurrence(spec, center, r, samples, seed, start, horizon,
                                        batches, workers, cap)
    else:
        tau, vis, nud = _orbit_recurrence(spec, center, r, samples, seed, start, horizon, mu, cap,
                                          default_burn_in(spec, burn_in))
    return RecurrenceSample(tau, vis, mu, cap, horizon, int(nud))


def return_time_distribution(spec: MapSpec, center: float, r: float, samples: int,
                             seed: int = 0, **kw) -> EmpiricalDist:
    """Law of tau_B * mu(B) for starts drawn from the invariant measure on B."""
    return recurrence_sample(spec, center, r, samples, seed, start="ball", **kw).dist("return")


def hitting_time_distribution(spec: MapSpec, center: float, r: float, samples: int,
                              seed: int = 0, **kw) -> EmpiricalDist:
    """Law of tau_B * mu(B) for starts drawn from the invariant measure on the whole space."""
    return recurrence_sample(spec, center, r, samples, seed, start="global", **kw).dist("hitting")


@dataclass
class VisitCounts:
    pmf: np.ndarray
    t: float
    horizon: int
    samples: int
    return_sample: RecurrenceSample

    def reference(self, k_max: int | None = None) -> np.ndarray:
        return poisson_pmf(self.t, self.pmf.size - 1 if k_max is None else k_max)

    def tv(self, k_max: int = 5) -> float:
        return tv_distance(self.pmf, self.reference(max(k_max, self.pmf.size - 1)), k_max)


def visit_count_distribution(spec: MapSpec, center: float, r: float, t: float, samples: int,
                             seed: int = 0, **kw) -> VisitCounts:
    """Empirical pmf of the number of visits to B within [t / mu(B)] steps from a start in B."""
    if not t > 0:
        raise ParameterError("t must be > 0")
    mu = ball_measure(spec, center, r, kw.get("density"))
    horizon = int(math.floor(t / mu))
    rs = recurrence_sample(spec, center, r, samples, seed, start="ball", horizon=horizon, **kw)
    pmf = np.bincount(rs.visits) / rs.visits.size
    return VisitCounts(pmf, t, horizon, samples, rs)


def hitting_from_returns(ret: EmpiricalDist, t) -> np.ndarray:
    """int_0^t (1 - F_return(s)) ds = E[min(R, t)], the hitting CDF implied by ``ret``."""
    t = np.atleast_1d(np.asarray(t, float))
    v = ret.values
    w = ret.weights
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        out[i] = np.sum(w * np.minimum(v, ti))
    return out


def duality_distance(ret: EmpiricalDist, hit: EmpiricalDist, grid=None) -> float:
    """sup_t |F_hit(t) - int_0^t (1 - F_ret)| on a grid of t."""
    grid = np.linspace(0.0, 5.0, 501) if grid is None else np.asarray(grid, float)
    return float(np.max(np.abs(hit.cdf(grid) - hitting_from_returns(ret, grid))))
