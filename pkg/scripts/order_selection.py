"""Sweep link counts over a frame sequence and print the error table.

Reads frames from CSV (see make_synthetic_data.py) and reports, per
candidate order, the sequence-wide max and mean reconstruction error of
the node spline, then the smallest order meeting the threshold.
"""

import argparse

from bendsim.io import parse_frames, write_report
from bendsim.reconstruction import select_order


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", required=True)
    parser.add_argument("--min", type=int, default=2)
    parser.add_argument("--max", type=int, default=6)
    parser.add_argument("--threshold-m", type=float, default=0.003)
    parser.add_argument("--out", default="order_report.json")
    args = parser.parse_args()

    frames = parse_frames(args.frames)
    report = select_order(frames, range(args.min, args.max + 1),
                          args.threshold_m)
    print(f"{len(frames)} frames, threshold {args.threshold_m} m")
    print(f"{'n':>3}  {'max error (m)':>14}  {'mean error (m)':>15}")
    for c in report.candidates:
        marker = " <- chosen" if c.n == report.chosen_n else ""
        print(f"{c.n:>3}  {c.max_error:>14.6g}  {c.mean_error:>15.6g}{marker}")
    if not report.threshold_met:
        print("threshold not met by any candidate")
    write_report(report, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
