"""Command line entry point: ``run``, ``estimate`` and ``selftest``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .cli_io import (
    ConfigError,
    RunManifest,
    emit_plot_data,
    parse_config,
    write_results,
    write_series,
)
from .estimators import ALL_KINDS, estimate_all
from .sampling import Dataset
from .simulation import run_study, with_overrides
from .windowing import Window, select_window

OUTPUT_ENV = "CENSORED_EVI_OUTPUT_DIR"
log = logging.getLogger("censored_evi")


def _add_override_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("config overrides (one flag per config key)")
    g.add_argument("--family", nargs="+")
    g.add_argument("--beta0", type=float)
    g.add_argument("--beta1", type=float)
    g.add_argument("--x-stars", dest="x_stars", nargs="+", type=float)
    g.add_argument("--p-levels", dest="p_levels", nargs="+", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--R", type=int)
    g.add_argument("--h", type=float)
    g.add_argument("--k-grid", dest="k_grid", nargs="+", type=int)
    g.add_argument("--kinds", nargs="+")
    g.add_argument("--master-seed", dest="master_seed", type=int)
    g.add_argument("--censoring-family", dest="censoring_family")
    g.add_argument("--ww-kl-spacing-form", dest="ww_kl_spacing_form", action="store_true", default=None)
    g.add_argument("--ppd-fix-tau", dest="ppd_fix_tau", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="censored-evi", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a simulation study")
    run.add_argument("config", help="YAML study config or a manifest.json from an earlier run")
    run.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
    run.add_argument("--workers", type=int, default=1, help="replication processes")
    run.add_argument("--no-plot-data", action="store_true")
    _add_override_flags(run)

    est = sub.add_parser("estimate", help="apply the estimators to a z,delta,x CSV")
    est.add_argument("data")
    est.add_argument("--x", type=float, nargs="+", required=True, help="covariate point")
    est.add_argument("--h", type=float, required=True, help="window radius")
    est.add_argument("--kinds", nargs="+", default=[k.value for k in ALL_KINDS])
    est.add_argument("--k-grid", dest="k_grid", nargs="+", type=int)
    est.add_argument("--ww-kl-spacing-form", action="store_true")
    est.add_argument("--ppd-fix-tau", type=float)
    est.add_argument("--out", help="CSV path (default stdout)")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _cmd_run(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        config = parse_config(args.config)
    overrides = {
        key: getattr(args, key)
        for key in (
            "family", "beta0", "beta1", "x_stars", "p_levels", "n", "R", "h",
            "k_grid", "kinds", "master_seed", "censoring_family",
            "ww_kl_spacing_form", "ppd_fix_tau",
        )
    }
    config = with_overrides(config, **overrides)
    for w in caught:
        log.warning("%s", w.message)
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or "results")
    manifest = RunManifest.create(config)
    log.info("running %d replications per cell", config.R)

    def progress(i, total):
        if i % max(1, total // 20) == 0 or i == total:
            log.info("replication %d/%d", i, total)

    table = run_study(config, workers=max(1, args.workers), progress=progress)
    paths = write_results(table, manifest, out)
    if not args.no_plot_data and table.rows:
        paths += emit_plot_data(table, out / "plot_data", kinds=config.kinds, x_stars=config.x_stars)
    for p in paths:
        print(p)
    return 0


def _cmd_estimate(args) -> int:
    data = Dataset.from_csv(args.data)
    s = select_window(data, Window(tuple(args.x), args.h))
    if s.m < 6:
        raise ValueError(f"window holds {s.m} observations; need at least 6")
    k_grid = args.k_grid or list(range(5, s.m))
    bad = [k for k in k_grid if not 1 <= k <= s.m - 1]
    if bad:
        raise ValueError(f"k values {bad} outside [1, {s.m - 1}] for this window")
    options = {} if args.ppd_fix_tau is None else {"fix_tau": args.ppd_fix_tau}
    series = estimate_all(
        s, args.kinds, k_grid, ww_kl_spacing_form=args.ww_kl_spacing_form, ppd_options=options
    )
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_series(series, fh)
    else:
        write_series(series, sys.stdout)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "estimate":
            return _cmd_estimate(args)
        from .selftest import run as selftest

        return 0 if selftest() else 1
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
