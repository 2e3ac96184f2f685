"""Decompose Haar-random two-qubit unitaries and report the worst residual.

    python3 scripts/decomposition_check.py --samples 1000
"""

import argparse

from scipy.stats import unitary_group

from xjroute.decomp import decompose_su4, evaluate_circuit, phase_aligned_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    worst, counts = 0.0, set()
    for s in range(args.seed, args.seed + args.samples):
        u = unitary_group.rvs(4, random_state=s)
        circ = decompose_su4(u)
        worst = max(worst, phase_aligned_distance(u, evaluate_circuit(circ)))
        counts.add((circ.ms_count, circ.single_qubit_count))
    print(f"{args.samples} samples, worst residual {worst:.2e}, (MS, 1q) counts seen {sorted(counts)}")


if __name__ == "__main__":
    main()
