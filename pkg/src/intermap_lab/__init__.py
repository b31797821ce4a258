"""Numerical laboratory for intermittent circle and Lorenz-type interval maps."""

from .maps import (Branch, CircleParams, IntervalParams, MapSpec, Orbit,
                   deriv_circle, deriv_interval, derivative, eval_circle,
                   eval_interval, evaluate, invert_branch, iterate_orbit,
                   lyapunov_estimate, periodic_points)

__version__ = "0.1.0"
