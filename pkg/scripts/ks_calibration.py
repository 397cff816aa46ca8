"""Empirical size of the CU KS and dispersion tests on homogeneous synthetic data.

    python3 scripts/ks_calibration.py --reps 2000 --rate 4 --weeks 13
"""

import argparse

import numpy as np

from nhppfit.ingest import count_in_interval
from nhppfit.stattests import TestConfig, cu_ks_test, dispersion_test
from nhppfit.synth import TrueRate, generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--rate", type=float, default=50 / 13, help="arrivals per hour")
    ap.add_argument("--weeks", type=int, default=13)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--interval", default="8,9", help="a,b in hours")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    a, b = (float(v) for v in args.interval.split(","))
    cfg = TestConfig(args.alpha)
    rate = TrueRate.constant(args.rate)
    ks_acc = disp_acc = 0
    ks_k = []
    for r in range(args.reps):
        ds = generate(rate, args.weeks, seed=args.seed + r)
        ks = cu_ks_test(ds, a, b, cfg)
        ks_acc += ks.accepted
        ks_k.append(ks.k)
        disp_acc += dispersion_test(count_in_interval(ds, a, b)[0], cfg).accepted
    se = np.sqrt(args.alpha * (1 - args.alpha) / args.reps)
    print(f"mean pooled count k = {np.mean(ks_k):.1f}")
    print(f"KS acceptance         {ks_acc / args.reps:.3f}  (nominal {1 - args.alpha:.3f} +- {2 * se:.3f})")
    print(f"dispersion acceptance {disp_acc / args.reps:.3f}")


if __name__ == "__main__":
    main()
