from __future__ import annotations

from ..errors import ParameterError
from ..maps import MapSpec

ORBIT_BURN_IN = 10**6


def resolve_sampler(spec: MapSpec, sampler: str) -> str:
    """'iid' (independent Lebesgue starts) or 'orbit' (one long orbit)."""
    if sampler == "auto":
        return "iid" if spec.kind == "circle" else "orbit"
    if sampler not in ("iid", "orbit"):
        raise ParameterError(f"unknown sampler {sampler!r}")
    if sampler == "iid" and spec.kind != "circle":
        raise ParameterError("iid Lebesgue starts are only invariant for the circle map")
    return sampler


def default_burn_in(spec: MapSpec, burn_in: int | None) -> int:
    if burn_in is not None:
        return int(burn_in)
    return ORBIT_BURN_IN if spec.kind == "interval" else 0
