"""Mean routing time, junction passes and swaps versus grid size.

Writes one CSV row per (engine, penalty, M) and prints the linear fits.

    python3 scripts/routing_scaling.py --m-range 2..12 --iters 300 --out results/scaling.csv
"""

import argparse
import os

from xjroute.cli import parse_m_range
from xjroute.stats import EnsembleParams, fit_linear, run_ensemble, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m-range", default="2..12")
    ap.add_argument("--iters", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/scaling.csv")
    args = ap.parse_args()

    ms = parse_m_range(args.m_range)
    configs = [("lane_priority", 0.0), ("lower_bound", 0.0), ("swap_based", 0.5), ("swap_based", 1.0)]
    results = []
    for engine, pen in configs:
        rows = [
            run_ensemble(EnsembleParams(m, engine, swap_penalty=pen), args.iters, args.seed, args.jobs)
            for m in ms
        ]
        results += rows
        fit = fit_linear([(r.params.m, r.mean_tau) for r in rows], "M")
        print(f"{engine:14s} pen={pen:.1f}  tau = {fit.slope:.3f} M + {fit.intercept:.3f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(results, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
