"""``intermap-lab <experiment> --config FILE [--seed S] [--workers W] [--out DIR]``.

Exit codes: 0 all checks pass, 2 configuration error, 3 numerical failure,
4 at least one acceptance check failed.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .errors import IntermapError
from .experiments import run_experiment
from .report import all_pass, emit_report

OUT_ENV = "INTERMAP_LAB_OUT"
DEFAULT_OUT = "intermap_lab_out"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="intermap-lab", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="key = value configuration file")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--workers", type=int, help="override the configured worker count")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        problems = []
        if cfg.experiment != args.experiment:
            problems.append(f"config is for experiment {cfg.experiment!r}, "
                            f"command line asks for {args.experiment!r}")
        if args.seed is not None and args.seed < 0:
            problems.append("seed must be >= 0")
        if args.workers is not None and args.workers < 1:
            problems.append("workers must be >= 1")
        if problems:
            raise ConfigError(problems)
        cfg = cfg.with_overrides(seed=args.seed, workers=args.workers)
    except ConfigError as e:
        for p in e.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    try:
        results = run_experiment(cfg)
        ok = True
        for res in results:
            paths = emit_report(res.rows, out, res.name, cfg.hash(), cfg.seed, cfg.canonical(),
                                res.tables)
            passed = all_pass(res.rows)
            ok &= passed
            for r in res.rows:
                flag = "info" if r.passed is None else ("PASS" if r.passed else "FAIL")
                print(f"{flag:4s} {res.name}.{r.metric} = {r.value:.6g}")
            print(f"{res.name}: {'pass' if passed else 'FAIL'} -> {paths[-1]}")
    except IntermapError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    return EXIT_OK if ok else EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
