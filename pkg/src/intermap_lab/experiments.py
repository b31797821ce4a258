"""One runnable experiment per prediction: rows for the report plus data tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import density as D
from .config import ExperimentConfig
from .empirical import exponential_cdf, gaussian_cdf, ks_distance
from .errors import ParameterError
from .maps import MapSpec, periodic_points
from .observables import HolderPower, IndicatorSmoothed
from .partition import (build_partition, distortion_scan, exponents, kac_sum, pair_log_ratio,
                        scaling_constants, tail_measure)
from .report import ReportRow
from .statistics import (G1, G2, G3, NPow, SqrtN, SqrtNLogN, birkhoff_normalized_sums,
                         duality_distance, estimate_correlation, extreme_maxima_distribution,
                         fit_centered_gaussian, hitting_time_distribution, large_deviation_curve,
                         ld_exponent, recurrence_sample, renewal_prediction, stable_limit,
                         visit_count_distribution)
from .statistics.recurrence import check_ball

# Observables used by the limit-law experiments (see README for the choice).
CLT_OBSERVABLE = HolderPower(nu=1.0, center=0.5).centered()
STABLE_OBSERVABLE = HolderPower(nu=0.5).centered()
LD_OBSERVABLE = HolderPower(nu=1.0, scale=0.125).centered()


@dataclass
class ExperimentResult:
    name: str
    rows: list
    tables: dict = field(default_factory=dict)


def _params(cfg: ExperimentConfig, **extra) -> dict:
    p = {"map": cfg.map_kind, "gamma": cfg.gamma}
    if cfg.kappa is not None:
        p["kappa"] = cfg.kappa
    p.update(extra)
    return p


def _is_hemmer(spec: MapSpec) -> bool:
    return spec.kind == "interval" and spec.params.kappa == 0.5 and spec.params.gamma == 2.0


def _reference_density(spec: MapSpec, table=None) -> D.DensityEstimate:
    """Fine Ulam estimate on partition-refined cells (used for ball measures and rho(0))."""
    table = build_partition(spec, 3000) if table is None else table
    return D.ulam_density(spec, edges=D.partition_edges(table, 2000, 2000))


# ---------------------------------------------------------------- scaling

def run_scaling(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    N = int(cfg.get("N", 10**5 if spec.kind == "circle" else 10**4))
    table = build_partition(spec, N)
    sc = scaling_constants(table)
    rows = []
    for key in ("one_minus_a", "l", "b"):
        rows.append(ReportRow("scaling", _params(cfg, N=N), f"scaled_{key}", sc[key]["value"],
                              None, f"scaling.{key}", sc[key]["reference"]))
    e = exponents(spec)["b"]
    if spec.kind == "circle":
        g = spec.gamma
        ref_tail = (1.0 / g) * (2 * g / (g - 1)) ** (g / (g - 1))
    else:
        ref_tail = 2.0 * sc["b"]["reference"]
    tail = N ** e * tail_measure(table, 0, N)
    rows.append(ReportRow("scaling", _params(cfg, N=N), "scaled_tail_measure", tail, None,
                          f"scaling.tail.{spec.kind}", ref_tail))
    kac = kac_sum(table, 0)
    rows.append(ReportRow("scaling", _params(cfg, N=N), "kac_total_length", kac["total"], None,
                          "scaling.kac", 2.0))
    idx = np.unique(np.concatenate([np.arange(0, min(N, 100) + 1),
                                    np.round(np.logspace(2, math.log10(N), 200)).astype(int)]))
    idx = idx[idx <= N]
    data = [(int(n), table.a_plus[n], table.a_minus[n],
             table.b_plus[n] if n >= 1 else "", table.b_minus[n] if n >= 1 else "",
             table.a_plus[n] - table.a_plus[n - 1] if n >= 1 else "") for n in idx]
    return ExperimentResult("scaling", rows, {"partition": (
        ("n", "a_n", "a_minus_n", "b_n", "b_minus_n", "l_n"), data)})


# ------------------------------------------------------------- distortion

def run_distortion(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    p_max = int(cfg.get("p_max", 50))
    pairs = int(cfg.get("pairs", 200))
    p_ref = min(10, p_max)
    scan, kept = distortion_scan(spec, 0, p_max, pairs, cfg.seed, return_pairs=True)
    K = scan.K_hat
    worst = -np.inf
    for p, xs, ys in kept:
        dl, dt = pair_log_ratio(spec, xs, ys, p)
        ok = dt >= 1e-12
        if ok.any():
            worst = max(worst, float(np.max(dl[ok] - K * dt[ok] * (1 + 1e-9))))
    prm = _params(cfg, m=0, p_max=p_max, pairs=pairs)
    rows = [
        ReportRow("distortion", prm, f"K_ratio_p{p_max}_over_p{p_ref}",
                  scan.K_at(p_max) / scan.K_at(p_ref), None, "distortion.stabilization"),
        ReportRow("distortion", prm, "pair_bound_excess", worst, None, "distortion.pair_bound"),
        ReportRow("distortion", prm, "K_hat", K),
        ReportRow("distortion", prm, "worst_derivative_ratio", scan.worst_ratio),
        ReportRow("distortion", prm, "skipped_pairs", scan.skipped),
    ]
    data = [(p, scan.sup_by_p[p - 1], scan.K_by_p[p - 1]) for p in range(1, p_max + 1)]
    return ExperimentResult("distortion", rows, {"scan": (("p", "sup_quotient", "K_running"), data)})


# ------------------------------------------------------------ correlation

def run_correlation(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    n_max = int(cfg.get("n_max", 200))
    samples = int(cfg.get("samples", 10**7))
    table = build_partition(spec, max(2, n_max + 2))
    f = IndicatorSmoothed(float(table.a_minus[1]), float(table.a_plus[1]))
    est = estimate_correlation(spec, f, n_max=n_max, samples=samples, seed=cfg.seed,
                               batches=int(cfg.get("batches", 100)), workers=cfg.workers)
    lo, hi = min(20, n_max // 2), n_max
    slope, se = est.slope(lo, hi)
    prm = _params(cfg, n_max=n_max, samples=samples, fit=[lo, hi])
    rows = [ReportRow("correlation", prm, "slope", slope, se, "correlation.slope", -ld_exponent(spec))]
    pred = np.full(n_max + 1, np.nan)
    if spec.kind == "circle":
        for n in range(1, n_max + 1):
            pred[n] = renewal_prediction(table, 0, n, est.mean_f, est.mean_g)
        n0 = min(100, n_max)
        c, cse = est.at(n0)
        rows.append(ReportRow("correlation", _params(cfg, n=n0), "C_over_renewal", c / pred[n0],
                              cse / pred[n0], "correlation.renewal_ratio", 1.0))
    data = [(int(n), est.C[i], est.stderr[i], pred[n] if n < pred.size else np.nan)
            for i, n in enumerate(est.n)]
    return ExperimentResult("correlation", rows, {"curve": (("n", "C", "stderr", "renewal"), data)})


# -------------------------------------------------------------- limit law

def _stable_index(spec: MapSpec) -> float:
    g = spec.gamma
    return g / (g - 1.0) if spec.kind == "circle" else 1.0 / (spec.params.kappa * (g - 1.0))


def run_limit_law(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    n = int(cfg.get("n", 10**4))
    samples = int(cfg.get("samples", 10**5))
    p = _stable_index(spec)
    grid = np.linspace(-4, 4, 161)
    if p > 2 or math.isclose(p, 2.0):
        norm = SqrtN if p > 2 else SqrtNLogN
        phi = CLT_OBSERVABLE
        dist = birkhoff_normalized_sums(spec, phi, n, samples, norm, seed=cfg.seed,
                                        workers=cfg.workers)
        sigma, ks = fit_centered_gaussian(dist)
        ref = gaussian_cdf(sigma)
        prm = _params(cfg, n=n, samples=samples, norm=norm.kind, observable=repr(phi))
        rows = [ReportRow("limit_law", prm, "ks_gaussian", ks, None, "limit_law.clt_ks"),
                ReportRow("limit_law", prm, "sigma", sigma)]
        grid = grid * sigma
    else:
        phi = STABLE_OBSERVABLE
        rho0 = None
        if spec.kind == "interval":
            rho0 = D.density_at_zero(_reference_density(spec), build_partition(spec, 3000))
        const = stable_limit(spec, phi, rho0)
        law = const.law
        dist = birkhoff_normalized_sums(spec, phi, n, samples, NPow(1.0 / p), seed=cfg.seed,
                                        workers=cfg.workers)
        ks = ks_distance(dist, law.cdf)
        ref = law.cdf
        prm = _params(cfg, n=n, samples=samples, p=p, observable=repr(phi))
        rows = [ReportRow("limit_law", prm, "ks_stable", ks, None, "limit_law.stable_ks"),
                ReportRow("limit_law", prm, "stable_c", law.c),
                ReportRow("limit_law", prm, "stable_beta", law.beta),
                ReportRow("limit_law", prm, "stable_c_alternative", const.c_alt)]
        grid = grid * law.c ** (1.0 / law.p)
    data = list(zip(grid, dist.cdf(grid), ref(grid)))
    return ExperimentResult("limit_law", rows, {"cdf": (("t", "empirical", "reference"), data)})


# ------------------------------------------------------- large deviations

def run_large_dev(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    eps = float(cfg.get("eps", 0.05))
    samples = int(cfg.get("samples", 10**7))
    n_list = np.unique(np.round(np.logspace(2, 4, 9)).astype(int))
    curve = large_deviation_curve(spec, LD_OBSERVABLE, eps, n_list, samples, seed=cfg.seed,
                                  workers=cfg.workers)
    slope, se = curve.slope()
    prm = _params(cfg, eps=eps, samples=samples, observable=repr(LD_OBSERVABLE),
                  n_range=[int(curve.n[0]), int(curve.n[-1])], dropped=curve.dropped)
    rows = [ReportRow("large_dev", prm, "slope", slope, se, "large_dev.slope", -curve.zeta)]
    data = list(zip(curve.n, curve.prob, curve.stderr, curve.exceed))
    return ExperimentResult("large_dev", rows, {"curve": (("n", "prob", "stderr", "exceedances"), data)})


# ------------------------------------------------------------- recurrence

# Balls within 2r of a periodic point of period <= PERIOD_EXCLUSION have
# short returns and an extremal index below 1, so they are not generic.
PERIOD_EXCLUSION = 6


def generic_centers(spec: MapSpec, r: float, count: int, seed: int) -> list:
    """Lebesgue-random centers away from the cusp, the neutral points and short periodic orbits."""
    rng = np.random.default_rng([seed, 7919])
    periodic = periodic_points(spec, PERIOD_EXCLUSION)
    out = []
    while len(out) < count:
        c = float(rng.uniform(-1.0, 1.0))
        try:
            check_ball(spec, c, r, margin=max(10.0, 0.05 / r))
        except (ParameterError, ValueError):
            continue
        if np.min(np.abs(periodic - c)) <= 2.0 * r:
            continue
        out.append(c)
    return out


def _density_for(spec: MapSpec):
    return None if spec.kind == "circle" or _is_hemmer(spec) else _reference_density(spec)


def run_recurrence(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    r = float(cfg.get("r", 1e-3))
    samples = int(cfg.get("samples", 10**5))
    count = int(cfg.get("centers", 5))
    dens = _density_for(spec)
    rows, data = [], []
    for i, c in enumerate(generic_centers(spec, r, count, cfg.seed)):
        prm = _params(cfg, center=c, r=r, samples=samples)
        ret = recurrence_sample(spec, c, r, samples, seed=cfg.seed + 2 * i, start="ball",
                                workers=cfg.workers, density=dens).dist("return")
        hit = hitting_time_distribution(spec, c, r, samples, seed=cfg.seed + 2 * i + 1,
                                        workers=cfg.workers, density=dens)
        k_ret, k_hit = ks_distance(ret, exponential_cdf), ks_distance(hit, exponential_cdf)
        dual = duality_distance(ret, hit)
        rows += [ReportRow("recurrence", prm, "return_ks", k_ret, None, f"recurrence.return_ks.{spec.kind}"),
                 ReportRow("recurrence", prm, "hitting_ks", k_hit, None, f"recurrence.hitting_ks.{spec.kind}"),
                 ReportRow("recurrence", prm, "duality_distance", dual, None, "recurrence.duality")]
        data.append((c, k_ret, k_hit, dual, ret.meta["censored"], hit.meta["censored"]))
    return ExperimentResult("recurrence", rows, {"centers": (
        ("center", "return_ks", "hitting_ks", "duality", "return_censored", "hitting_censored"), data)})


def run_visits(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    r = float(cfg.get("r", 1e-3))
    t = float(cfg.get("t", 1.0))
    samples = int(cfg.get("samples", 10**5))
    c = generic_centers(spec, r, 1, cfg.seed)[0]
    vc = visit_count_distribution(spec, c, r, t, samples, seed=cfg.seed, workers=cfg.workers,
                                  density=_density_for(spec))
    prm = _params(cfg, center=c, r=r, t=t, samples=samples, k_max=5)
    rows = [ReportRow("visits", prm, "tv_poisson", vc.tv(5), None, "visits.tv"),
            ReportRow("visits", prm, "p0", float(vc.pmf[0]), None, None, math.exp(-t))]
    ref = vc.reference(max(5, vc.pmf.size - 1))
    data = [(k, float(vc.pmf[k]) if k < vc.pmf.size else 0.0, float(ref[k])) for k in range(ref.size)]
    return ExperimentResult("visits", rows, {"pmf": (("k", "empirical", "poisson"), data)})


# -------------------------------------------------------------------- EVL

def run_evl(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    n = int(cfg.get("n", 10**4))
    samples = int(cfg.get("samples", 10**4))
    xi = generic_centers(spec, 1.0 / n, 1, cfg.seed)[0]
    dens = _density_for(spec)
    rows, data = [], []
    for j, g in enumerate((G1(), G2(1.0), G3(1.0, 1.0))):
        dist = extreme_maxima_distribution(spec, xi, g, n, samples, seed=cfg.seed + j,
                                           density=dens, workers=cfg.workers)
        ks = ks_distance(dist, g.reference())
        prm = _params(cfg, xi=xi, n=n, samples=samples, g=g.kind, alpha=g.alpha)
        rows.append(ReportRow("evl", prm, f"ks_{g.kind}", ks, None, "evl.ks"))
        data.append((g.kind, ks, dist.meta["a_n"], dist.meta["b_n"], dist.meta["s_n"]))
    return ExperimentResult("evl", rows, {"classes": (("class", "ks", "a_n", "b_n", "s_n"), data)})


# ---------------------------------------------------------------- density

def run_density(cfg: ExperimentConfig) -> ExperimentResult:
    spec = cfg.spec()
    D.require_interval(spec)
    cells = int(cfg.get("cells", 2000))
    bins = int(cfg.get("bins", 1000))
    samples = int(cfg.get("samples", 10**8))
    burn_in = int(cfg.get("burn_in", 10**6))
    N = int(cfg.get("N", 3000))
    table = build_partition(spec, N)
    fine = D.ulam_density(spec, edges=D.partition_edges(table, min(N - 1, 2000), 2000))
    ulam = D.ulam_density(spec, cells)
    hist = D.histogram_density(spec, bins, samples, burn_in, cfg.seed, workers=cfg.workers)
    prm = _params(cfg, cells=cells, bins=bins, samples=samples, burn_in=burn_in)
    rows = []
    if _is_hemmer(spec):
        rows.append(ReportRow("density", prm, "ulam_l1_exact",
                              ulam.l1_to_masses(D.hemmer_masses(ulam.edges)), None, "density.ulam_l1"))
        rows.append(ReportRow("density", prm, "histogram_l1_exact",
                              hist.l1_to_masses(D.hemmer_masses(hist.edges)), None,
                              "density.histogram_l1"))
    else:
        rows.append(ReportRow("density", prm, "ulam_l1_fine", D.l1_cross(ulam, fine)))
    rows.append(ReportRow("density", prm, "histogram_ulam_l1", D.l1_cross(hist, ulam), None,
                          "density.cross_l1"))
    rows.append(ReportRow("density", prm, "histogram_pushforward_l1",
                          float(np.abs(D.pushforward(spec, hist) - hist.masses).sum()), None,
                          "density.pushforward_l1"))
    n_range = (50, min(500, N - 2))
    ex = D.cylinder_measure_exponents(spec, fine, table, n_range)
    rows.append(ReportRow("density", _params(cfg, n_range=list(n_range)), "plus_one_measure_exponent",
                          ex["plus_one"]["measure_slope"], ex["plus_one"]["measure_se"],
                          "density.plus_one_exponent", ex["plus_one"]["measure_reference"]))
    for key in ("minus_one", "zero"):
        rows.append(ReportRow("density", _params(cfg, n_range=list(n_range)), f"{key}_measure_exponent",
                              ex[key]["measure_slope"], ex[key]["measure_se"], None,
                              ex[key]["measure_reference"]))
    rows.append(ReportRow("density", _params(cfg, n_range=list(n_range)), "minus_one_density_exponent",
                          ex["minus_one"]["density_slope"], ex["minus_one"]["density_se"], None,
                          ex["minus_one"]["density_reference"]))
    rows.append(ReportRow("density", prm, "density_at_zero", ex["rho0"]))
    kac = D.kac_check(fine, table)
    rows.append(ReportRow("density", prm, "kac_C_r_sum", kac["total"], None, "density.kac", 1.0))
    rows.append(ReportRow("density", prm, "C_r", kac["C_r"]))
    tables = {
        "ulam": (("bin_lo", "bin_hi", "mass", "density"),
                 list(zip(ulam.edges[:-1], ulam.edges[1:], ulam.masses, ulam.density))),
        "histogram": (("bin_lo", "bin_hi", "mass", "density"),
                      list(zip(hist.edges[:-1], hist.edges[1:], hist.masses, hist.density))),
    }
    return ExperimentResult("density", rows, tables)


RUNNERS = {
    "scaling": run_scaling,
    "distortion": run_distortion,
    "correlation": run_correlation,
    "limit_law": run_limit_law,
    "large_dev": run_large_dev,
    "recurrence": run_recurrence,
    "visits": run_visits,
    "evl": run_evl,
    "density": run_density,
}


def run_experiment(cfg: ExperimentConfig) -> list:
    """Results for the configured experiment (``all`` runs every applicable one)."""
    if cfg.experiment != "all":
        return [RUNNERS[cfg.experiment](cfg)]
    names = [k for k in RUNNERS if not (k == "density" and cfg.map_kind == "circle")]
    return [RUNNERS[k](cfg) for k in names]
