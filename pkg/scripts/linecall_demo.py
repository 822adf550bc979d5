#!/usr/bin/env python3
"""Line-call demo: exact in/out decisions from interval measurement streams.

A ball landing position is never known exactly; a tracking system produces a
stream of nested rational intervals around the (signed) distance from the
line. This demo builds three synthetic streams and shows how the verdict
engine consumes just enough measurements to call IN, OUT, or LET (too close
to call at the requested resolution).

Run: python scripts/linecall_demo.py
"""

from fractions import Fraction

import natspace as ns

THRESHOLD_EXP = 8  # call once the interval is narrower than 2^-8


def describe(label, point, note):
    verdict = ns.line_call(point, THRESHOLD_EXP)
    lo, hi = ns.point_to_rational_bounds(point, THRESHOLD_EXP + 2)
    print(f"{label:<22} verdict={verdict:<4} bracket=[{lo}, {hi}]  ({note})")


def main():
    print(f"calling at resolution 2^-{THRESHOLD_EXP}\n")

    # A ball 1 cm inside the line (units: fraction of a metre).
    describe(
        "clearly in",
        ns.rational_to_point(Fraction(1, 100)),
        "measurements converge to +1/100",
    )

    # A ball 3 cm outside.
    describe(
        "clearly out",
        ns.rational_to_point(Fraction(-3, 100)),
        "measurements converge to -3/100",
    )

    # A ball exactly on the line: every measurement halves the interval
    # around zero, so no finite resolution can certify a side.
    on_the_line = ns.point_from_prefix(
        ns.std_space("sigma_R"),
        [ns.DyadicInterval(-1, m) for m in range(THRESHOLD_EXP + 2)],
    )
    describe("dead on the line", on_the_line, "intervals [-1/2^m, 1/2^m]")

    print(
        "\nThe same engine is exposed as `natspace linecall`; see README for"
        " the file-based stream format."
    )


if __name__ == "__main__":
    main()
