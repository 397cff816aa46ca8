"""Exhaustive optimum on a small grid for a range of smoothness weights.

Prints how fit error E and smoothness S of the optimal partition move as
w grows, next to what the solver finds with a few seeds.

    python3 scripts/weight_sweep.py --segments "0-6:3,6-12:9,12-18:4,18-24:7" --seed 400
"""

import argparse

from nhppfit.empirical import build_empirical
from nhppfit.partition import PartitionGrid, PartitionProblem
from nhppfit.solver import SolverConfig, brute_force, solve
from nhppfit.synth import TrueRate, generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--segments", default="0-6:3,6-12:9,12-18:4,18-24:7")
    ap.add_argument("--weeks", type=int, default=13)
    ap.add_argument("--seed", type=int, default=400)
    ap.add_argument("--grid", type=int, default=8)
    ap.add_argument("--weights", default="0,0.1,1,10,1000")
    ap.add_argument("--solver-seeds", type=int, default=5)
    args = ap.parse_args()

    ds = generate(TrueRate.parse(args.segments), args.weeks, seed=args.seed)
    grid = PartitionGrid(G=args.grid, B=args.grid)
    base = PartitionProblem(ds, build_empirical(ds), 0.0, grid=grid)
    print(f"{'w':>8} {'N':>3} {'E':>10} {'S':>10} {'f':>10}  solver hits  boundaries (h)")
    for w in (float(v) for v in args.weights.split(",")):
        prob = base.with_weight(w)
        opt = brute_force(prob)
        if opt is None:
            print(f"{w:>8g}  no feasible partition")
            continue
        hits = sum(
            solve(prob, SolverConfig(seed=s)).best.f == opt.f for s in range(args.solver_seeds)
        )
        print(f"{w:>8g} {opt.partition.N:>3} {opt.E:>10.3f} {opt.S:>10.3f} {opt.f:>10.3f}"
              f"  {hits:>5}/{args.solver_seeds}    {opt.partition.boundaries_hours}")


if __name__ == "__main__":
    main()
