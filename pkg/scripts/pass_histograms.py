"""Junction-pass histograms for the lane engine at a few grid sizes.

    python3 scripts/pass_histograms.py --m 3 6 9 --out results/passes.json
"""

import argparse
import os

from xjroute.stats import EnsembleParams, run_ensemble, write_histograms


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[3, 6, 9])
    ap.add_argument("--iters", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/passes.json")
    args = ap.parse_args()

    results = [run_ensemble(EnsembleParams(m), args.iters, args.seed, args.jobs) for m in args.m]
    for r in results:
        print(f"N={r.n:4d}  mean passes {r.mean_junction_passes:.2f}  max {r.max_passes}  "
              f"P(>=14) {r.pass_tail(14):.4f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_histograms(results, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
