"""Compare syndrome handling for N-qubit repetitive encoding: ignore the
syndrome, flip on every error syndrome or none, or choose per syndrome."""

import argparse

import numpy as np

from repqed import analytic as an
from repqed import scenario as sc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--steps", type=int, default=11)
    args = ap.parse_args()
    print(f"{'N':>2} {'p':>5} {'ignore':>9} {'shared':>9} {'per-syn':>9} {'oracle':>9}  flipped syndromes")
    for n in args.n:
        for p in np.linspace(0, 1, args.steps):
            fix = sc.corrections(n, p)
            flips = sorted("".join(map(str, k)) for k, u in fix.items() if abs(u[1, 0]) > 0.5)
            print(
                f"{n:>2} {p:5.2f} {an.f_ign_nq(n, p):9.6f} {an.f_qec_nq(n, p):9.6f} "
                f"{an.f_qec_nq_per_syndrome(n, p):9.6f} {sc.oracle_fidelity(n, p, 'qec_optimal'):9.6f}  {' '.join(flips)}"
            )


if __name__ == "__main__":
    main()
