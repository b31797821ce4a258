"""Numba kernels for the Monte Carlo estimators.

Orbits are advanced in blocks (one time step for a whole array of
independent points) so that the closed-form maps vectorize. Observables are
encoded as an integer code plus a parameter vector:

    OBS_POWER   [nu, center, scale, shift, circle]  scale * d(x, center)^nu - shift
    OBS_SMOOTH  [lo, hi, width, scale, shift]       C^1 smoothed indicator of (lo, hi)
    OBS_LOG     [xi, circle, shift]                 -log d(x, xi) - shift
    OBS_POWD    [xi, circle, shift, alpha, cls, D]  d^(-1/alpha) (cls 2) or D - d^(1/alpha) (cls 3)
"""

import math

import numpy as np
from numba import njit

from ._kernels import (CIRCLE, EPS, P_FAST, P_GAMMA, P_KAPPA, advance)

OBS_POWER = 0
OBS_SMOOTH = 1
OBS_LOG = 2
OBS_POWD = 3
N_OPRM = 6


@njit(cache=True, nogil=True)
def step_block(kind, prm, xs):
    """Advance every entry of ``xs`` one step in place; returns the nudge count."""
    nud = 0
    fast = prm[P_FAST] != 0.0
    if fast and kind == CIRCLE and prm[P_GAMMA] == 2.0:
        for i in range(xs.size):
            x = xs[i]
            y = 2.0 * math.sqrt(abs(x)) - 1.0
            if x < 0.0:
                y = -y
            if y == 0.0:
                y = math.copysign(EPS, x)
                nud += 1
            xs[i] = y
        return nud
    if fast and kind != CIRCLE and prm[P_KAPPA] == 0.5 and prm[P_GAMMA] == 2.0:
        for i in range(xs.size):
            x = xs[i]
            y = 1.0 - 2.0 * math.sqrt(abs(x))
            if y == 0.0:
                y = math.copysign(EPS, x)
                nud += 1
            elif y == -1.0 and x != -1.0:
                y = -1.0 + EPS
                nud += 1
            xs[i] = y
        return nud
    for i in range(xs.size):
        y, k = advance(kind, prm, xs[i])
        xs[i] = y
        nud += k
    return nud


@njit(cache=True, nogil=True)
def dist(x, xi, circle):
    d = abs(x - xi)
    if circle and d > 1.0:
        d = 2.0 - d
    return d


@njit(cache=True, nogil=True)
def _smoothstep(s):
    s = min(max(s, 0.0), 1.0)
    return s * s * (3.0 - 2.0 * s)


@njit(cache=True, nogil=True)
def obs_value(code, op, x):
    if code == OBS_POWER:
        return op[2] * dist(x, op[1], op[4] != 0.0) ** op[0] - op[3]
    if code == OBS_SMOOTH:
        lo, hi, w = op[0], op[1], op[2]
        return op[3] * _smoothstep((x - lo) / w) * _smoothstep((hi - x) / w) - op[4]
    d = dist(x, op[0], op[1] != 0.0)
    if code == OBS_LOG:
        return -math.log(d) - op[2]
    if op[4] == 2.0:
        return d ** (-1.0 / op[3]) - op[2]
    return op[5] - d ** (1.0 / op[3]) - op[2]


@njit(cache=True, nogil=True)
def obs_block(code, op, xs, out):
    # specialized loops for the hot cases, generic fallback otherwise
    if code == OBS_SMOOTH:
        lo, hi, iw, sc, sh = op[0], op[1], 1.0 / op[2], op[3], op[4]
        for i in range(xs.size):
            x = xs[i]
            out[i] = sc * _smoothstep((x - lo) * iw) * _smoothstep((hi - x) * iw) - sh
    elif code == OBS_POWER and op[0] == 2.0 and (op[4] == 0.0 or op[1] == 0.0):
        c, sc, sh = op[1], op[2], op[3]
        for i in range(xs.size):
            d = xs[i] - c
            out[i] = sc * d * d - sh
    elif code == OBS_POWER and op[0] == 1.0:
        c, sc, sh, circ = op[1], op[2], op[3], op[4] != 0.0
        for i in range(xs.size):
            d = abs(xs[i] - c)
            if circ and d > 1.0:
                d = 2.0 - d
            out[i] = sc * d - sh
    else:
        for i in range(xs.size):
            out[i] = obs_value(code, op, xs[i])


@njit(cache=True, nogil=True)
def obs_apply(code, op, xs):
    out = np.empty(xs.size)
    obs_block(code, op, xs, out)
    return out


# ------------------------------------------------------------- iid starts

@njit(cache=True, nogil=True)
def corr_iid(kind, prm, fc, fp, gc, gp, x0, n_max):
    """Sums over starts of f(T^n x) g(x), f(T^n x) and g(x), n = 0..n_max."""
    xs = x0.copy()
    gx = np.empty(xs.size)
    fx = np.empty(xs.size)
    obs_block(gc, gp, xs, gx)
    s_fg = np.zeros(n_max + 1)
    s_f = np.zeros(n_max + 1)
    nud = 0
    for n in range(n_max + 1):
        if n > 0:
            nud += step_block(kind, prm, xs)
        obs_block(fc, fp, xs, fx)
        a = 0.0
        b = 0.0
        for i in range(xs.size):
            a += fx[i] * gx[i]
            b += fx[i]
        s_fg[n] = a
        s_f[n] = b
    return s_fg, s_f, gx.sum(), nud


@njit(cache=True, nogil=True)
def birkhoff_iid(kind, prm, fc, fp, x0, checkpoints):
    """S_n f at each checkpoint n (sorted, >= 1) for every start."""
    xs = x0.copy()
    fx = np.empty(xs.size)
    acc = np.zeros(xs.size)
    out = np.empty((checkpoints.size, xs.size))
    k = 0
    nud = 0
    n_end = checkpoints[-1]
    for n in range(n_end):
        obs_block(fc, fp, xs, fx)
        for i in range(xs.size):
            acc[i] += fx[i]
        nud += step_block(kind, prm, xs)
        while k < checkpoints.size and checkpoints[k] == n + 1:
            out[k, :] = acc
            k += 1
    return out, nud


@njit(cache=True, nogil=True)
def min_distance_iid(kind, prm, x0, xi, circle, n):
    """min_{0<=j<n} d(T^j x, xi) for every start."""
    xs = x0.copy()
    best = np.full(xs.size, np.inf)
    nud = 0
    for j in range(n):
        for i in range(xs.size):
            d = dist(xs[i], xi, circle)
            if d < best[i]:
                best[i] = d
        if j < n - 1:
            nud += step_block(kind, prm, xs)
    return best, nud


@njit(cache=True, nogil=True)
def entry_iid(kind, prm, x0, xi, r, circle, cap, horizon):
    """First entry time (>= 1) into the ball B_r(xi) and visits in 1..horizon.

    Entry times above ``cap`` are reported as -1 (censored); the scan stops at
    max(cap, horizon).
    """
    xs = x0.copy()
    tau = np.full(xs.size, -1, dtype=np.int64)
    visits = np.zeros(xs.size, dtype=np.int64)
    t_end = max(cap, horizon)
    active = xs.size
    nud = 0
    for t in range(1, t_end + 1):
        nud += step_block(kind, prm, xs)
        for i in range(xs.size):
            if dist(xs[i], xi, circle) < r:
                if tau[i] < 0 and t <= cap:
                    tau[i] = t
                    active -= 1
                if t <= horizon:
                    visits[i] += 1
        if active == 0 and t >= horizon:
            break
    return tau, visits, nud


# ------------------------------------------------------------ long orbits

@njit(cache=True, nogil=True)
def orbit_values(kind, prm, x, burn_in, length, fc, fp):
    """f along one orbit after burn-in; returns (values, final point, nudges)."""
    nud = 0
    for _ in range(burn_in):
        x, k = advance(kind, prm, x)
        nud += k
    out = np.empty(length)
    for i in range(length):
        out[i] = obs_value(fc, fp, x)
        x, k = advance(kind, prm, x)
        nud += k
    return out, x, nud


@njit(cache=True, nogil=True)
def orbit_block(kind, prm, x, burn_in, length):
    """Raw orbit points after burn-in."""
    nud = 0
    for _ in range(burn_in):
        x, k = advance(kind, prm, x)
        nud += k
    out = np.empty(length)
    for i in range(length):
        out[i] = x
        x, k = advance(kind, prm, x)
        nud += k
    return out, nud


@njit(cache=True, nogil=True)
def orbit_histogram(kind, prm, x, burn_in, length, edges):
    """Occupation counts of one orbit in the bins given by sorted ``edges``."""
    nud = 0
    for _ in range(burn_in):
        x, k = advance(kind, prm, x)
        nud += k
    counts = np.zeros(edges.size - 1, dtype=np.int64)
    lo = edges[0]
    hi = edges[-1]
    nb = edges.size - 1
    uniform = True
    h = (hi - lo) / nb
    for j in range(1, edges.size):
        if abs(edges[j] - (lo + j * h)) > 1e-12:
            uniform = False
            break
    for _ in range(length):
        if uniform:
            j = int((x - lo) / h)
            if j >= nb:
                j = nb - 1
            elif j < 0:
                j = 0
            # guard against rounding at bin edges
            if x < edges[j] and j > 0:
                j -= 1
            elif x >= edges[j + 1] and j < nb - 1:
                j += 1
        else:
            j = np.searchsorted(edges, x, side="right") - 1
            if j >= nb:
                j = nb - 1
            elif j < 0:
                j = 0
        counts[j] += 1
        x, k = advance(kind, prm, x)
        nud += k
    return counts, x, nud


@njit(cache=True, nogil=True)
def visit_times(xs, xi, r, circle):
    """Indices i with d(xs[i], xi) < r."""
    n = 0
    for i in range(xs.size):
        if dist(xs[i], xi, circle) < r:
            n += 1
    out = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(xs.size):
        if dist(xs[i], xi, circle) < r:
            out[k] = i
            k += 1
    return out


@njit(cache=True, nogil=True)
def block_min_distance(xs, xi, circle, n):
    """Minimum distance to xi over consecutive non-overlapping windows of length n."""
    m = xs.size // n
    out = np.empty(m)
    for b in range(m):
        best = np.inf
        for j in range(b * n, (b + 1) * n):
            d = dist(xs[j], xi, circle)
            if d < best:
                best = d
        out[b] = best
    return out
