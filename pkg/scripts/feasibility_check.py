"""Decide whether any feasible partition exists, by dynamic programming.

An interval (i, j) on the grid is admissible when it passes both tests and
the length bound. A feasible partition with at most B intervals exists iff
G is reachable from 0 in at most B admissible steps. Useful to tell apart
"the solver missed it" from "there is nothing to find".

    python3 scripts/feasibility_check.py --input calls.csv --weekday tue --weeks 13
    python3 scripts/feasibility_check.py --segments "0-7:4,7-11:12,11-18:8,18-24:5" --seed 1015
"""

import argparse

from nhppfit.empirical import build_empirical
from nhppfit.ingest import load_arrivals
from nhppfit.partition import PartitionGrid, PartitionProblem
from nhppfit.stattests import TestConfig
from nhppfit.synth import TrueRate, generate


def min_intervals(prob: PartitionProblem) -> list[int] | None:
    """Cut points of a feasible partition with the fewest intervals, or None."""
    G = prob.grid.G
    best = [None] * (G + 1)  # (count, previous cut)
    best[0] = (0, -1)
    for j in range(1, G + 1):
        for i in range(j):
            if best[i] is None or prob.interval(i, j).max_violation > 0:
                continue
            cand = (best[i][0] + 1, i)
            if best[j] is None or cand < best[j]:
                best[j] = cand
    if best[G] is None or best[G][0] > prob.grid.B:
        return None
    cuts, j = [G], G
    while j > 0:
        j = best[j][1]
        cuts.append(j)
    return cuts[::-1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--input")
    ap.add_argument("--weekday", default="tue")
    ap.add_argument("--segments", help="simulate instead of reading --input")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--weeks", type=int, default=13)
    ap.add_argument("--grid", type=int, default=24)
    ap.add_argument("--max-intervals", type=int, default=24)
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()

    if args.segments:
        ds = generate(TrueRate.parse(args.segments), args.weeks, seed=args.seed)
    elif args.input:
        ds = load_arrivals(args.input, args.weekday, args.weeks)
    else:
        ap.error("give --input or --segments")
    grid = PartitionGrid.from_hours(args.grid, args.max_intervals, 1.0)
    prob = PartitionProblem(ds, build_empirical(ds), 1.0, TestConfig(args.alpha), grid)
    cuts = min_intervals(prob)
    if cuts is None:
        print("no feasible partition exists")
        raise SystemExit(2)
    hours = [24 * c / grid.G for c in cuts]
    print(f"feasible; fewest intervals = {len(cuts) - 1}, e.g. boundaries {hours}")


if __name__ == "__main__":
    main()
