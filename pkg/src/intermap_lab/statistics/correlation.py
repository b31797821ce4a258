"""Correlation decay and the renewal prediction for its leading term."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _mc
from ..empirical import loglog_slope
from ..errors import ParameterError
from ..maps import MapSpec
from ..observables import Observable
from ..parallel import batch_rngs, blocks, run_batches, split_counts, uniform_starts
from ..partition import PartitionTable, _tail_sum_beyond
from ._common import default_burn_in, resolve_sampler

BLOCK = 8192


@dataclass
class CorrelationEstimate:
    n: np.ndarray
    C: np.ndarray
    stderr: np.ndarray
    samples: int
    batches: int
    mean_f: float
    mean_g: float
    sampler: str
    nudges: int = 0
    meta: dict = field(default_factory=dict)

    def slope(self, n_lo: int, n_hi: int) -> tuple:
        """Log-log slope of |C(n)| over n_lo <= n <= n_hi, with standard error."""
        sel = (self.n >= n_lo) & (self.n <= n_hi)
        c = np.abs(self.C[sel])
        if np.any(c <= 0):
            raise ParameterError("correlation changes sign inside the fit window")
        return loglog_slope(self.n[sel], c)

    def at(self, n: int) -> tuple:
        return float(self.C[n]), float(self.stderr[n])


def _iid_batch(spec, fc, fp, gc, gp, n_max, count, rng):
    kind, prm = spec.code, spec.kernel_params()
    s_fg = np.zeros(n_max + 1)
    s_f = np.zeros(n_max + 1)
    s_g = 0.0
    nud = 0
    x0 = uniform_starts(rng, count)
    for lo, hi in blocks(count, BLOCK):
        a, b, c, k = _mc.corr_iid(kind, prm, fc, fp, gc, gp, x0[lo:hi], n_max)
        s_fg += a
        s_f += b
        s_g += c
        nud += k
    return s_fg, s_f, s_g, count, nud


def estimate_correlation(spec: MapSpec, f: Observable, g: Observable | None = None,
                         n_max: int = 200, samples: int = 10**6, seed: int = 0,
                         batches: int = 100, workers: int = 1,
                         sampler: str = "auto", burn_in: int | None = None) -> CorrelationEstimate:
    """C(n) = E[f(T^n x) g(x)] - E[f] E[g] for n = 0..n_max with batch-mean errors.

    For the circle map starts are iid uniform (Lebesgue is invariant). For the
    interval map one long orbit is run after a burn-in and cut into
    ``batches`` consecutive segments.
    """
    if samples < 10**4:
        raise ParameterError("samples must be >= 1e4")
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    g = f if g is None else g
    mode = resolve_sampler(spec, sampler)
    fc, fp = f.encode(spec)
    gc, gp = g.encode(spec)
    counts = split_counts(samples, batches)

    if mode == "iid":
        rngs = batch_rngs(seed, batches)
        res = run_batches(lambda i: _iid_batch(spec, fc, fp, gc, gp, n_max, int(counts[i]), rngs[i]),
                          batches, workers)
        s_fg = np.array([r[0] for r in res])
        s_f = np.array([r[1] for r in res])
        s_g = np.array([r[2] for r in res])
        cnt = np.array([r[3] for r in res], dtype=float)
        nud = sum(r[4] for r in res)
    else:
        s_fg, s_f, s_g, cnt, nud = _orbit_sums(spec, fc, fp, gc, gp, n_max, counts, seed,
                                               default_burn_in(spec, burn_in))

    N = cnt.sum()
    C = s_fg.sum(0) / N - (s_f.sum(0) / N) * (s_g.sum() / N)
    Cb = s_fg / cnt[:, None] - (s_f / cnt[:, None]) * (s_g / cnt)[:, None]
    se = Cb.std(0, ddof=1) / np.sqrt(batches)
    return CorrelationEstimate(np.arange(n_max + 1), C, se, int(N), batches,
                               float(s_f[:, 0].sum() / N), float(s_g.sum() / N), mode, int(nud))


def _orbit_sums(spec, fc, fp, gc, gp, n_max, counts, seed, burn_in):
    kind, prm = spec.code, spec.kernel_params()
    rng = np.random.default_rng(seed)
    x = float(uniform_starts(rng, 1)[0])
    nud = 0
    _, x, k = _mc.orbit_values(kind, prm, x, burn_in, 0, fc, fp)
    nud += k
    B = counts.size
    s_fg = np.zeros((B, n_max + 1))
    s_f = np.zeros((B, n_max + 1))
    s_g = np.zeros(B)
    look = max(n_max, 1)
    for b in range(B):
        M = int(counts[b])
        pts, k = _mc.orbit_block(kind, prm, x, 0, M + look)
        nud += k
        x = float(pts[M])
        fv = _mc.obs_apply(fc, fp, pts)
        gv = _mc.obs_apply(gc, gp, pts[:M])
        for n in range(n_max + 1):
            s_fg[b, n] = fv[n:n + M] @ gv
            s_f[b, n] = fv[n:n + M].sum()
        s_g[b] = gv.sum()
    return s_fg, s_f, s_g, counts.astype(float), nud


def renewal_leading_term(table: PartitionTable, m: int, n: int) -> float:
    """Sum over k > n of the tail measure of the return time to I_m, in probability units.

    Beyond the table depth the tail is extended by its fitted power law.
    """
    if m < 0 or n < 0:
        raise ParameterError("m and n must be >= 0")
    return 0.5 * _tail_sum_beyond(table, m, n)


def renewal_prediction(table: PartitionTable, m: int, n: int, mean_f: float, mean_g: float) -> float:
    """Predicted C(n) for observables supported in I_m with the given means."""
    return renewal_leading_term(table, m, n) * mean_f * mean_g
