#!/usr/bin/env python3
"""
Independent Monte Carlo oracle for the residual-loss acceptance check.

Simulates the 2-state Gilbert chain with the stdlib ``random`` module (no
package code) and measures the run-to-run spread of two per-run rates over
``--runs`` runs of ``--frames`` frames:

  piggyback residual   frame lost and its successor lost (or it is last)
  repetition residual  frame lost

Prints the mean and the sample stddev of each, and the stddev of a mean
over ``--seeds`` runs, which is what the acceptance test freezes.
"""

import argparse
import math
import random
import statistics


def one_run(rng, n, p_gb, p_bb):
    lost = []
    bad = False
    for _ in range(n):
        u = rng.random()
        bad = u < p_bb if bad else u < p_gb
        lost.append(bad)
    unrecovered = sum(1 for a, b in zip(lost, lost[1:]) if a and b) + lost[-1]
    return unrecovered / n, sum(lost) / n


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--flr", type=float, default=0.20)
    ap.add_argument("--p-bb", type=float, default=0.5)
    ap.add_argument("--frames", type=int, default=100_000)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    p_gb = args.flr * (1 - args.p_bb) / (1 - args.flr)
    rng = random.Random(args.seed)
    pig, rep = zip(*(one_run(rng, args.frames, p_gb, args.p_bb) for _ in range(args.runs)))

    for name, values in (("piggyback", pig), ("repetition", rep)):
        sd = statistics.stdev(values)
        print(f"{name:10s} mean={statistics.fmean(values):.6f} "
              f"sd_run={sd:.6f} sd_mean{args.seeds}={sd / math.sqrt(args.seeds):.6f}")

    # analytic cross-check for the loss-rate spread
    lam = args.p_bb - p_gb
    pi = args.flr
    sd = math.sqrt(pi * (1 - pi) / args.frames * (1 + lam) / (1 - lam))
    print(f"analytic repetition sd_run={sd:.6f}")


if __name__ == "__main__":
    main()
