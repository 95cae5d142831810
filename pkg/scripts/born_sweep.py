#!/usr/bin/env python3
"""Sweep the polar angle and compare measured frequencies to the Born rule.

For each angle theta, prepare Ry(theta)|0> fresh, measure N times in Z, and
print the empirical outcome-1 frequency next to sin^2(theta/2) with the
3-sigma band.
"""

from __future__ import annotations

import argparse
import math
import random

from qubitsynth.qubit import MeasurementBasis, RotationAxis, measure, new_qubit, rotate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shots", type=int, default=5000)
    parser.add_argument("--steps", type=int, default=13)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    print(f"{'theta/pi':>9} {'predicted':>10} {'measured':>10} {'3sigma':>8}  ok")
    worst = 0.0
    for i in range(args.steps):
        theta = math.pi * i / (args.steps - 1)
        predicted = math.sin(theta / 2) ** 2
        ones = 0
        for _ in range(args.shots):
            state = rotate(new_qubit(), RotationAxis.Y, theta)
            outcome, _ = measure(state, MeasurementBasis.Z, rng)
            ones += outcome.bit
        measured = ones / args.shots
        sigma3 = 3 * math.sqrt(max(predicted * (1 - predicted), 1e-12) / args.shots)
        ok = abs(measured - predicted) <= max(sigma3, 1e-9)
        worst = max(worst, abs(measured - predicted) - sigma3)
        print(f"{theta / math.pi:9.3f} {predicted:10.4f} {measured:10.4f} {sigma3:8.4f}  {'yes' if ok else 'NO'}")
    return 0 if worst <= 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
