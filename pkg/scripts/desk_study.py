"""Run a study from a config and print the best k per estimator for each cell.

    python3 scripts/desk_study.py configs/smoke.yaml --out results/smoke
"""

import argparse
import time
from collections import defaultdict
from pathlib import Path

from censored_evi.cli_io import RunManifest, emit_plot_data, parse_config, write_results
from censored_evi.simulation import run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results/desk")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    config = parse_config(args.config)
    print(f"estimated single-core runtime {config.estimated_seconds() / 60:.1f} min")
    t0 = time.perf_counter()
    table = run_study(config, workers=args.workers)
    out = Path(args.out)
    write_results(table, RunManifest.create(config), out)
    if table.rows:
        emit_plot_data(table, out / "plot_data", kinds=config.kinds, x_stars=config.x_stars)
    print(f"{len(table.rows)} rows in {time.perf_counter() - t0:.0f} s -> {out}")

    best = defaultdict(dict)
    for row in table.rows:
        cell = (row.family, row.x_star, row.p_censor)
        cur = best[cell].get(row.estimator)
        if cur is None or row.mse < cur.mse:
            best[cell][row.estimator] = row
    for (family, x, pc), rows in sorted(best.items()):
        print(f"\n{family}  x*={x}  censored={pc:.0%}  gamma={next(iter(rows.values())).gamma_true:.3f}")
        for name, r in sorted(rows.items(), key=lambda kv: kv[1].mse):
            flag = "  (mostly missing)" if r.unreliable else ""
            print(f"  {name:6s} k={r.k:4d}  mse={r.mse:.4f}  bias={r.median_bias:+.4f}{flag}")


if __name__ == "__main__":
    main()
