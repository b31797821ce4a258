"""Acceptance criteria 1-12 at full size and at their pre-registered tolerances.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts the same condition. Runtime budgets are part of each criterion.
"""

import dataclasses
import time

import numpy as np
import pytest
from scipy import stats

from intermap_lab import MapSpec, eval_circle, eval_interval, lyapunov_estimate
from intermap_lab.config import parse_config
from intermap_lab.experiments import run_experiment
from intermap_lab.partition import build_partition, kac_sum, scaling_constants, tail_measure
from intermap_lab.stable import StableLaw

pytestmark = pytest.mark.acceptance

CIRCLE2 = MapSpec.circle(2.0)
HEMMER = MapSpec.hemmer()


def run(text):
    """Rows of a configured experiment, keyed by metric (lists when repeated)."""
    out = {}
    for res in run_experiment(parse_config(text)):
        for r in res.rows:
            out.setdefault(r.metric, []).append(r)
    return out


def values(rows, metric):
    return [r.value for r in rows[metric]]


@pytest.fixture(scope="module")
def density_run():
    t0 = time.perf_counter()
    rows = run("experiment=density\nmap.kind=interval\nmap.kappa=0.5\nmap.gamma=2.0\n"
               "cells=2000\nbins=1000\nsamples=100000000\nseed=0\n")
    return rows, time.perf_counter() - t0


def test_criterion_01_partition_scaling(record):
    t0 = time.perf_counter()
    sc = scaling_constants(build_partition(CIRCLE2, 10**5))
    dt = time.perf_counter() - t0
    a, l = sc["one_minus_a"]["value"], sc["l"]["value"]
    ok = 3.92 <= a <= 4.08 and 3.8 <= l <= 4.2 and dt < 1.0
    record(1, "partition scaling", ok, f"n(1-a_n) = {a:.4f}, n^2 l_n = {l:.4f}", dt)
    assert ok


def test_criterion_02_closed_forms(record):
    # the generic implicit solver, not the closed-form fast path
    circle = dataclasses.replace(CIRCLE2, closed_form=False)
    hemmer = dataclasses.replace(HEMMER, closed_form=False)
    t0 = time.perf_counter()
    x = np.random.default_rng(0).uniform(0, 1, 10**5)
    e1 = float(np.max(np.abs(eval_circle(circle, x) - (2 * np.sqrt(x) - 1))))
    y = np.random.default_rng(1).uniform(-1, 1, 10**5)
    e2 = float(np.max(np.abs(eval_interval(hemmer, y) - (1 - 2 * np.sqrt(np.abs(y))))))
    dt = time.perf_counter() - t0
    ok = e1 <= 1e-12 and e2 <= 1e-12 and dt < 1.0
    record(2, "closed forms", ok, f"circle max err {e1:.1e}, Hemmer max err {e2:.1e}", dt)
    assert ok


def test_criterion_03_tail_measure(record):
    t0 = time.perf_counter()
    n = 10**4
    c = n**2 * tail_measure(build_partition(CIRCLE2, n), 0, n)
    h = n**2 * tail_measure(build_partition(HEMMER, n), 0, n)
    dt = time.perf_counter() - t0
    ok = abs(c / 8 - 1) <= 0.02 and abs(h / 8 - 1) <= 0.05 and dt < 1.0
    record(3, "tail measure", ok, f"circle n^2 tail = {c:.4f}, Hemmer = {h:.4f} (target 8)", dt)
    assert ok


def test_criterion_04_bounded_distortion(record):
    t0 = time.perf_counter()
    rows = run("experiment=distortion\nmap.kind=circle\nmap.gamma=2.0\np_max=50\npairs=200\n")
    dt = time.perf_counter() - t0
    ratio = rows["K_ratio_p50_over_p10"][0]
    excess = rows["pair_bound_excess"][0]
    ok = ratio.passed and excess.passed and dt < 60
    record(4, "bounded distortion", ok,
           f"K_hat(50)/K_hat(10) = {ratio.value:.4f} (<= 1.05), pair-bound excess {excess.value:.2e}"
           f" (<= 0)", dt)
    assert ok


def test_criterion_05_lyapunov(record):
    t0 = time.perf_counter()
    h = lyapunov_estimate(HEMMER, 100, 10**5, seed=0)
    c = lyapunov_estimate(CIRCLE2, 100, 10**5, seed=1)
    dt = time.perf_counter() - t0
    ok = abs(h.value - 0.5) <= 0.01 and abs(c.value - 0.5) <= 0.01 and dt < 60
    record(5, "Lyapunov exponents", ok,
           f"Hemmer {h.value:.4f} +- {h.stderr:.4f}, circle {c.value:.4f} +- {c.stderr:.4f}", dt)
    assert ok


def test_criterion_06_hemmer_density(record, density_run):
    rows, dt = density_run
    u = rows["ulam_l1_exact"][0]
    h = rows["histogram_l1_exact"][0]
    e = rows["plus_one_measure_exponent"][0]
    ok = u.value <= 5e-3 and h.value <= 1e-2 and abs(e.value + 3) <= 0.3 and dt < 600
    record(6, "Hemmer density", ok,
           f"Ulam L1 {u.value:.2e}, histogram L1 {h.value:.4f}, +1 exponent {e.value:.3f}", dt)
    assert ok


def test_criterion_07_correlation_decay(record):
    t0 = time.perf_counter()
    rows = run("experiment=correlation\nmap.kind=circle\nmap.gamma=2.0\nn_max=200\n"
               "samples=10000000\nseed=0\n")
    dt = time.perf_counter() - t0
    s = rows["slope"][0]
    r = rows["C_over_renewal"][0]
    ok = abs(s.value + 1) <= 0.15 and abs(r.value - 1) <= 0.2 and dt < 900
    record(7, "correlation decay", ok,
           f"slope {s.value:.3f} +- {s.stderr:.3f} (target -1 +- 0.15), "
           f"C(100)/renewal {r.value:.3f}", dt)
    assert ok


def test_criterion_08_limit_laws(record):
    t0 = time.perf_counter()
    clt = run("experiment=limit_law\nmap.kind=circle\nmap.gamma=1.5\nn=10000\nsamples=100000\n")
    st = run("experiment=limit_law\nmap.kind=circle\nmap.gamma=3.0\nn=10000\nsamples=100000\n")
    dt = time.perf_counter() - t0
    k1 = clt["ks_gaussian"][0].value
    k2 = st["ks_stable"][0].value
    ok = k1 <= 0.02 and k2 <= 0.1 and dt < 1800
    record(8, "limit laws", ok, f"CLT KS {k1:.4f} (<= 0.02), stable KS {k2:.4f} (<= 0.1)", dt)
    assert ok


def test_criterion_09_recurrence(record):
    t0 = time.perf_counter()
    rec = run("experiment=recurrence\nmap.kind=circle\nmap.gamma=2.0\nr=0.001\n"
              "samples=100000\ncenters=5\nseed=0\n")
    vis = run("experiment=visits\nmap.kind=circle\nmap.gamma=2.0\nr=0.001\nt=1.0\n"
              "samples=100000\nseed=0\n")
    dt = time.perf_counter() - t0
    ret, hit = values(rec, "return_ks"), values(rec, "hitting_ks")
    tv = vis["tv_poisson"][0].value
    ok = len(ret) == 5 and max(ret) <= 0.02 and max(hit) <= 0.02 and tv <= 0.03 and dt < 1200
    record(9, "recurrence", ok,
           f"max return KS {max(ret):.4f}, max hitting KS {max(hit):.4f} over 5 centers, "
           f"visits TV {tv:.4f}", dt)
    assert ok


def test_criterion_10_evl(record):
    t0 = time.perf_counter()
    rows = run("experiment=evl\nmap.kind=circle\nmap.gamma=2.0\nn=10000\nsamples=10000\nseed=0\n")
    dt = time.perf_counter() - t0
    ks = {k: rows[f"ks_{k}"][0].value for k in ("G1", "G2", "G3")}
    ok = max(ks.values()) <= 0.05 and dt < 1200
    record(10, "extreme value laws", ok,
           f"Gumbel {ks['G1']:.4f}, Frechet {ks['G2']:.4f}, Weibull {ks['G3']:.4f}", dt)
    assert ok


def test_criterion_11_large_deviations(record):
    t0 = time.perf_counter()
    rows = run("experiment=large_dev\nmap.kind=circle\nmap.gamma=2.0\neps=0.05\n"
               "samples=10000000\nseed=0\n")
    dt = time.perf_counter() - t0
    s = rows["slope"][0]
    ok = abs(s.value + 1) <= 0.25 and dt < 1200
    record(11, "large deviations", ok, f"slope {s.value:.3f} +- {s.stderr:.3f} (target -1 +- 0.25)", dt)
    assert ok


def test_criterion_12_oracles(record, density_run):
    t0 = time.perf_counter()
    x = np.linspace(-5, 5, 100)
    law = StableLaw(2.0, 0.5)
    gauss = float(np.max(np.abs(law.cdf(x) - stats.norm.cdf(x))))
    kac = kac_sum(build_partition(CIRCLE2, 10**5), 0)["total"]
    rows, dens_dt = density_run
    cross = rows["histogram_ulam_l1"][0].value
    dt = time.perf_counter() - t0
    ok = gauss <= 1e-6 and abs(kac / 2 - 1) <= 0.01 and cross <= 1e-2
    record(12, "oracle checks", ok,
           f"stable p=2 vs Gaussian {gauss:.1e}, Kac length {kac:.4f} (total 2), "
           f"histogram/Ulam L1 {cross:.4f}", dt + dens_dt)
    assert ok
