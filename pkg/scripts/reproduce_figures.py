"""Write the CSV data behind each figure into an output directory."""

import argparse
import os
import time
from pathlib import Path

from repqed.cli import FIGURES, run_figure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures", help="output directory")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("figures", nargs="*", default=list(FIGURES), help=f"subset of {', '.join(FIGURES)}")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fig in args.figures:
        start = time.perf_counter()
        run_figure(fig, out / f"{fig}.csv", jobs=args.jobs)
        print(f"{fig}: {out / (fig + '.csv')} ({time.perf_counter() - start:.1f} s)")


if __name__ == "__main__":
    main()
