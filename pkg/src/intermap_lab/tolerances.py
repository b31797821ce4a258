"""Pre-registered pass/fail tolerances.

Reports decide pass/fail only through this table; user configuration can
change sizes and parameters but never a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

VERSION = "1"


@dataclass(frozen=True)
class Tolerance:
    kind: str      # "max": value <= tol; "min": value >= tol; "abs": |value - ref| <= tol; "rel": |value / ref - 1| <= tol
    tol: float
    note: str = ""

    def check(self, value: float, reference: float | None = None) -> bool:
        if value is None or not math.isfinite(value):
            return False
        if self.kind == "max":
            return value <= self.tol
        if self.kind == "min":
            return value >= self.tol
        if reference is None or not math.isfinite(reference):
            return False
        if self.kind == "abs":
            return abs(value - reference) <= self.tol
        if self.kind == "rel":
            return abs(value / reference - 1.0) <= self.tol
        raise ValueError(f"unknown tolerance kind {self.kind!r}")

    def describe(self) -> str:
        return {"max": f"<= {self.tol:g}", "min": f">= {self.tol:g}",
                "abs": f"+- {self.tol:g}", "rel": f"+- {100 * self.tol:g}%"}[self.kind]


TABLE: dict[str, Tolerance] = {
    # partition scalings
    "scaling.one_minus_a": Tolerance("rel", 0.02, "n^(1/(g-1)) (1 - a_n)"),
    "scaling.l": Tolerance("rel", 0.05, "n^(g/(g-1)) l_n"),
    "scaling.b": Tolerance("rel", 0.05, "n^e b_n"),
    "scaling.tail.circle": Tolerance("rel", 0.02, "n^e tail_measure(0, n)"),
    "scaling.tail.interval": Tolerance("rel", 0.05, "n^e tail_measure(0, n)"),
    "scaling.kac": Tolerance("rel", 0.01, "sum_p p length(Z_0p) = 2"),
    "closed_form": Tolerance("max", 1e-12, "sup |T - closed form|"),
    # distortion
    "distortion.stabilization": Tolerance("max", 1.05, "K(50) / K(10)"),
    "distortion.pair_bound": Tolerance("max", 0.0, "max over pairs of log ratio - K_hat |dT|"),
    # Lyapunov
    "lyapunov": Tolerance("abs", 0.01),
    # density
    "density.ulam_l1": Tolerance("max", 5e-3),
    "density.histogram_l1": Tolerance("max", 1e-2),
    "density.cross_l1": Tolerance("max", 1e-2),
    "density.plus_one_exponent": Tolerance("abs", 0.3),
    "density.kac": Tolerance("rel", 0.01),
    "density.pushforward_l1": Tolerance("max", 1e-2),
    # correlations
    "correlation.slope": Tolerance("abs", 0.15),
    "correlation.renewal_ratio": Tolerance("rel", 0.20),
    # limit laws
    "limit_law.clt_ks": Tolerance("max", 0.02),
    "limit_law.stable_ks": Tolerance("max", 0.1),
    "large_dev.slope": Tolerance("abs", 0.25),
    # recurrence
    "recurrence.return_ks.circle": Tolerance("max", 0.02),
    "recurrence.hitting_ks.circle": Tolerance("max", 0.02),
    "recurrence.return_ks.interval": Tolerance("max", 0.03),
    "recurrence.hitting_ks.interval": Tolerance("max", 0.03),
    "recurrence.duality": Tolerance("max", 0.02),
    "visits.tv": Tolerance("max", 0.03),
    "evl.ks": Tolerance("max", 0.05),
    # oracles
    "oracle.stable_gauss": Tolerance("max", 1e-6),
}


def get(name: str) -> Tolerance:
    try:
        return TABLE[name]
    except KeyError:
        raise KeyError(f"no pre-registered tolerance named {name!r}") from None
