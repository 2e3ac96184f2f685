"""Square-root quantum volume against gate error for every architecture.

    python3 scripts/qv_sweep.py --points 41 --out results/qv.csv
"""

import argparse
import os

import numpy as np

from xjroute.errormodel import ErrorModelParams, sweep, write_sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps-min", type=float, default=1e-4)
    ap.add_argument("--eps-max", type=float, default=1e-2)
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--plain", action="store_true", help="skip the self-consistency filter")
    ap.add_argument("--out", default="results/qv.csv")
    args = ap.parse_args()

    eps = np.geomspace(args.eps_min, args.eps_max, args.points)
    rows = sweep(eps, ErrorModelParams(), self_consistent=not args.plain)
    for r in rows:
        if np.isclose(r["epsilon_gate"], [1e-2, 1e-3, 1e-4]).any():
            print(f"eps={r['epsilon_gate']:.0e}  {r['architecture']:16s} sqrtQV {r['sqrt_qv']:.2f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
