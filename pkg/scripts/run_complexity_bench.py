#!/usr/bin/env python3
"""Objective-evaluation benchmark: efficient sweep vs direct 5D grid search.

Counts objective evaluations for both estimators over square grids, fits
log-log slopes, and reports how many lattice points the direct search needs
per evaluation spent by the sweep.  The direct search is only executed where
its lattice fits the evaluation budget; its lattice size is always reported.

Example:
    python3 scripts/run_complexity_bench.py --sizes 2,3,4,5,6,7,8,16,32
"""

import argparse
import sys

from chirp2d.experiments import complexity_benchmark, write_bench_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="2,3,4,5,6,7,8,12,16,24,32")
    ap.add_argument("--run-lse2d", action="store_true", help="actually execute the direct search")
    ap.add_argument("--eval-budget", type=int, default=10**8)
    ap.add_argument("--out", default="bench.csv")
    args = ap.parse_args(argv)

    sizes = tuple(int(s) for s in args.sizes.split(","))
    report = complexity_benchmark(sizes, run_lse2d=args.run_lse2d, eval_budget=args.eval_budget)
    write_bench_csv(report, args.out)

    print(f"{'M':>4} {'sweep evals':>12} {'lattice':>16} {'ratio':>10} {'sweep s':>9}")
    for row in report.rows:
        if row.efficient_evals is None:
            print(f"{row.M:>4} {'-':>12} {row.lse2d_lattice:>16} {'-':>10} {'-':>9}")
        else:
            ratio = row.lse2d_lattice / row.efficient_evals
            print(
                f"{row.M:>4} {row.efficient_evals:>12} {row.lse2d_lattice:>16} "
                f"{ratio:>10.0f} {row.efficient_seconds:>9.3f}"
            )
    fmt = lambda s: "n/a" if s is None else f"{s:.3f}"
    print(f"\nsweep slope {fmt(report.efficient_slope)} "
          f"(scan only {fmt(report.efficient_scan_slope)}, expect ~4), "
          f"lattice slope {fmt(report.lse2d_slope)} (expect 8)")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
