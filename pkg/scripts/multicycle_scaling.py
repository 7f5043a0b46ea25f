"""Infidelity of repeated detection cycles against the short-cycle estimate."""

import argparse

from repqed import analytic as an
from repqed import scenario as sc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-over-t1", type=float, default=0.2)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--m", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--placement", choices=sc.PULSE_PLACEMENTS, default="after_reencode")
    args = ap.parse_args()
    print(f"{'N':>2} {'M':>3} {'1-F sim':>12} {'1-F est':>12} {'ratio':>7} {'P sim':>8} {'P est':>8} {'1-F no pulses':>14}")
    for n in args.n:
        for m in args.m:
            sim = sc.multicycle_simulate(n, m, args.t_over_t1, 1.0, placement=args.placement)
            bare = sc.multicycle_simulate(n, m, args.t_over_t1, 1.0, pi_pulses=False)
            est = an.f_qed_multicycle_estimate(n, m, args.t_over_t1, 1.0)
            a, b = 1 - sim["fidelity"], 1 - est["fidelity"]
            print(
                f"{n:>2} {m:>3} {a:12.4e} {b:12.4e} {a / b:7.3f} {sim['p_select']:8.5f} "
                f"{est['p_select']:8.5f} {1 - bare['fidelity']:14.4e}"
            )


if __name__ == "__main__":
    main()
