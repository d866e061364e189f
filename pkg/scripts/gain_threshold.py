"""Empirical coupling threshold for a scenario: smallest swept k at which
the plain diffusive network synchronizes and the pattern is reached.

    python3 scripts/gain_threshold.py fn_antisync --from 0 --to 1 --steps 21
"""

import argparse
import os
from dataclasses import replace
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from sympat.cli import sweep_point, sweep_threads
from sympat.scenario import load_shipped


def main():
    ap = argparse.ArgumentParser(description="empirical H3 threshold by a sweep over k")
    ap.add_argument("scenario", nargs="?", default="fn_antisync")
    ap.add_argument("--from", dest="start", type=float, default=0.0)
    ap.add_argument("--to", dest="stop", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--t-end", type=float, help="override the horizon")
    args = ap.parse_args()
    sc = load_shipped(args.scenario)
    if args.t_end:
        sc = replace(sc, config=replace(sc.config, t_end=args.t_end))
    ks = np.linspace(args.start, args.stop, args.steps)
    with ProcessPoolExecutor(max_workers=min(sweep_threads(), len(ks))) as pool:
        rows = list(pool.map(sweep_point, [sc] * len(ks), ks))
    print(f"{'k':>8} {'aux sync':>10} {'within':>10} {'cross':>10}  achieved")
    for r in rows:
        print(f"{r['k']:8.4g} {r['auxiliary_sync_error']:10.2e} {r['within_group_error']:10.2e} "
              f"{r['cross_group_error']:10.2e}  {bool(r['achieved'])}")
    tol = sc.verify.pattern_tol
    hit = next((r["k"] for r in rows if r["achieved"] and r["auxiliary_sync_error"] <= tol), None)
    print(f"threshold (tol {tol:g}, t_end {sc.config.t_end:g}): "
          + (f"k ~ {hit:g}" if hit is not None else "not reached in range"))
    print(f"workers: {min(sweep_threads(), len(ks))} (SYMPAT_THREADS={os.environ.get('SYMPAT_THREADS', 'unset')})")


if __name__ == "__main__":
    main()
