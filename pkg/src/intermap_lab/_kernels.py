"""Scalar numba kernels for the circle map T and the interval map S.

Every kernel takes a ``kind`` code and a flat parameter vector ``prm`` so
that hot loops elsewhere can stay map-agnostic:

    prm = [gamma, kappa, a, b, closed_form, tol, maxit]

Near the neutral points the implicit equations are solved for the distance
to the fixed point (``u = 1 - T``) rather than for ``T`` itself, which keeps
full relative precision in the laminar phases.
"""

import math

import numpy as np
from numba import njit

CIRCLE = 0
INTERVAL = 1

P_GAMMA = 0
P_KAPPA = 1
P_A = 2
P_B = 3
P_FAST = 4
P_TOL = 5
P_MAXIT = 6
N_PRM = 7

EPS = 2.220446049250313e-16
LOG2 = math.log(2.0)


@njit(cache=True)
def solve_escape(s, coef, gamma, tol, maxit):
    """Root ``u`` in ``[s, 1]`` of ``u - coef * u**gamma = s``.

    The left side is increasing and concave on [0, 1] whenever
    ``coef * gamma < 1``, so Newton started below the root climbs
    monotonically. A bisection pass takes over if Newton stalls.
    """
    if s <= 0.0:
        return 0.0
    lo = s
    hi = 1.0
    u = s + coef * s ** gamma
    if u > hi:
        u = hi
    for _ in range(maxit):
        ug = u ** gamma
        r = u - coef * ug - s
        if r > 0.0:
            hi = u
        else:
            lo = u
        if abs(r) <= tol * s:
            return u
        du = r / (1.0 - coef * gamma * ug / u)
        un = u - du
        if un <= lo or un >= hi:
            un = 0.5 * (lo + hi)
        elif abs(du) <= 1e-8 * u:
            # quadratic convergence: the next residual is ~ coef u^g du^2/u^2,
            # orders of magnitude below tol * s, so skip the check
            return un
        if abs(un - u) <= 2.0 * EPS * u:
            return un
        u = un
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - coef * mid ** gamma > s:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 2.0 * EPS * hi:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- circle T

@njit(cache=True)
def _circle_pos(x, gamma, fast, tol, maxit):
    # x in (0, 1]
    if fast and gamma == 2.0:
        return 2.0 * math.sqrt(x) - 1.0
    c = 0.5 / gamma
    if x <= c:
        return math.exp(math.log(2.0 * gamma * x) / gamma) - 1.0
    u = solve_escape(1.0 - x, c, gamma, tol, maxit)
    return 1.0 - u


@njit(cache=True)
def circle_T(x, gamma, fast, tol, maxit):
    if x > 0.0:
        return _circle_pos(x, gamma, fast, tol, maxit)
    if x < 0.0:
        return -_circle_pos(-x, gamma, fast, tol, maxit)
    # one-sided limits at the cusp, side given by the sign bit
    return 1.0 if math.copysign(1.0, x) < 0.0 else -1.0


@njit(cache=True)
def _circle_pos_derivs(x, gamma, tol, maxit):
    """(DT, D2T, log DT) for x in (0, 1]."""
    c = 0.5 / gamma
    if x <= c:
        lg = math.log(2.0 * gamma * x) / gamma  # log(1 + T)
        w = math.exp(lg)
        d1 = 2.0 * math.exp((1.0 - gamma) * lg)
        xpp = 0.5 * (gamma - 1.0) * w ** (gamma - 2.0)
        logd = LOG2 + (1.0 - gamma) * lg
    else:
        u = solve_escape(1.0 - x, c, gamma, tol, maxit)
        den = 1.0 - 0.5 * u ** (gamma - 1.0)
        d1 = 1.0 / den
        if u > 0.0:
            xpp = 0.5 * (gamma - 1.0) * u ** (gamma - 2.0)
        elif gamma > 2.0:
            xpp = 0.0
        elif gamma == 2.0:
            xpp = 0.5
        else:
            xpp = np.inf
        logd = -math.log(den)
    return d1, -xpp * d1 * d1 * d1, logd


@njit(cache=True)
def circle_derivs(x, gamma, tol, maxit):
    if x > 0.0:
        return _circle_pos_derivs(x, gamma, tol, maxit)
    d1, d2, ld = _circle_pos_derivs(-x, gamma, tol, maxit)
    return d1, -d2, ld


@njit(cache=True)
def circle_preimage_right(y, gamma):
    """Preimage of y under the branch of T on (0, 1]."""
    c = 0.5 / gamma
    if y <= 0.0:
        return c * (1.0 + y) ** gamma
    return y + c * (1.0 - y) ** gamma


# -------------------------------------------------------------- interval S

@njit(cache=True)
def interval_S(x, kappa, gamma, a, b, fast, tol, maxit):
    ax = abs(x)
    if fast and kappa == 0.5 and gamma == 2.0:
        return 1.0 - 2.0 * math.sqrt(ax)
    if ax <= a:
        if ax == 0.0:
            return 1.0
        return 1.0 - b * ax ** kappa
    v = solve_escape(1.0 - ax, a, gamma, tol, maxit)
    return v - 1.0


@njit(cache=True)
def interval_derivs(x, kappa, gamma, a, b, tol, maxit):
    """(DS, D2S, log|DS|); DS is odd in x, D2S is even."""
    ax = abs(x)
    if ax <= a:
        d1 = kappa * b * ax ** (kappa - 1.0)
        logd = math.log(kappa * b) + (kappa - 1.0) * math.log(ax)
        hp = 1.0 / d1
        hpp = -(1.0 - kappa) / (kappa * kappa * b * b) * ax ** (1.0 - 2.0 * kappa)
    else:
        v = solve_escape(1.0 - ax, a, gamma, tol, maxit)
        hp = 1.0 - a * gamma * v ** (gamma - 1.0)
        d1 = 1.0 / hp
        logd = -math.log(hp)
        if v > 0.0:
            hpp = -a * gamma * (gamma - 1.0) * v ** (gamma - 2.0)
        elif gamma > 2.0:
            hpp = 0.0
        elif gamma == 2.0:
            hpp = -2.0 * a
        else:
            hpp = -np.inf
    # left branch: S1' = 1/h', S1'' = -h'' S1'^3
    d2 = -hpp * d1 * d1 * d1
    if x > 0.0:
        d1 = -d1
    return d1, d2, logd


@njit(cache=True)
def interval_h(y, kappa, gamma, a, b):
    """Inverse of the left (increasing) branch, [-1, 1] -> [-1, 0]."""
    if y <= 0.0:
        return y - a * (1.0 + y) ** gamma
    return -(((1.0 - y) / b) ** (1.0 / kappa))


# ------------------------------------------------------------ dispatchers

@njit(cache=True)
def step(kind, prm, x):
    fast = prm[P_FAST] != 0.0
    maxit = int(prm[P_MAXIT])
    if kind == CIRCLE:
        return circle_T(x, prm[P_GAMMA], fast, prm[P_TOL], maxit)
    return interval_S(x, prm[P_KAPPA], prm[P_GAMMA], prm[P_A], prm[P_B],
                      fast, prm[P_TOL], maxit)


@njit(cache=True)
def derivs(kind, prm, x):
    maxit = int(prm[P_MAXIT])
    if kind == CIRCLE:
        return circle_derivs(x, prm[P_GAMMA], prm[P_TOL], maxit)
    return interval_derivs(x, prm[P_KAPPA], prm[P_GAMMA], prm[P_A], prm[P_B],
                           prm[P_TOL], maxit)


@njit(cache=True)
def advance(kind, prm, x):
    """One step with the exact-zero / spurious-endpoint nudge.

    Returns ``(y, nudged)``. Landing exactly on 0 pushes y to the side of the
    previous iterate; landing exactly on +-1 from a point that is not itself
    a fixed point pushes y back inside. The nudge size is the spacing of
    doubles at 1 so that the orbit is not trapped by subnormal offsets.
    """
    y = step(kind, prm, x)
    if y == 0.0:
        return (EPS if x >= 0.0 else -EPS), 1
    if y == 1.0 or y == -1.0:
        if x != y and not (kind == CIRCLE and x == -y):
            return y - math.copysign(EPS, y), 1
    return y, 0


@njit(cache=True)
def orbit_final(kind, prm, x, n):
    nudges = 0
    for _ in range(n):
        x, k = advance(kind, prm, x)
        nudges += k
    return x, nudges


@njit(cache=True)
def orbit_points(kind, prm, x, n):
    out = np.empty(n + 1)
    out[0] = x
    nudges = 0
    for i in range(n):
        x, k = advance(kind, prm, x)
        nudges += k
        out[i + 1] = x
    return out, nudges


@njit(cache=True)
def apply_map(kind, prm, xs):
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = step(kind, prm, xs[i])
    return out


@njit(cache=True)
def apply_derivs(kind, prm, xs):
    d1 = np.empty(xs.size)
    d2 = np.empty(xs.size)
    for i in range(xs.size):
        d1[i], d2[i], _ = derivs(kind, prm, xs[i])
    return d1, d2


@njit(cache=True)
def lyapunov_orbits(kind, prm, x0s, n, burn_in):
    """Per-orbit Birkhoff averages of log|D map| after burn-in."""
    out = np.empty(x0s.size)
    nudges = 0
    for i in range(x0s.size):
        x = x0s[i]
        for _ in range(burn_in):
            x, k = advance(kind, prm, x)
            nudges += k
        acc = 0.0
        for _ in range(n):
            if x == 0.0:
                x = EPS
            _, _, ld = derivs(kind, prm, x)
            acc += ld
            x, k = advance(kind, prm, x)
            nudges += k
        out[i] = acc / n
    return out, nudges


@njit(cache=True)
def iterate_derivs(kind, prm, x, p):
    """(T^p x, D T^p(x), D^2 T^p(x), log|D T^p(x)|) by the chain rule."""
    f1 = 1.0
    f2 = 0.0
    logd = 0.0
    for _ in range(p):
        d1, d2, ld = derivs(kind, prm, x)
        f2 = d2 * f1 * f1 + d1 * f2
        f1 = d1 * f1
        logd += ld
        x = step(kind, prm, x)
    return x, f1, f2, logd
