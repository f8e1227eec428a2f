"""Exact vs closed form vs asymptotic vs Monte Carlo for both scenarios.

    python3 scripts/compare_report.py --trials 1000000 --grid 90:130:5
"""
import argparse
import sys
from dataclasses import replace

from semigf.config import GridSpec, McSpec, RunSpec
from semigf.channel import Scenario
from semigf.runner import Thresholds, compare_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", default="90:130:5")
    ap.add_argument("--window", default="140:150", help="diversity fit window in dB")
    args = ap.parse_args()

    lo, hi = (float(v) for v in args.window.split(":"))
    th = Thresholds(diversity_window=(lo, hi))
    ok = True
    for sc in Scenario:
        spec = replace(RunSpec(), scenario=sc, grid=GridSpec.parse(args.grid),
                       mc=McSpec(trials=args.trials, seed=args.seed))
        rep = compare_report(spec, th)
        ok &= rep["passed"]
        print(f"scenario {sc.value}: {'PASS' if rep['passed'] else 'FAIL'}")
        print(f"  {'protocol':9s} {'user':4s} {'closed dev':>10s} {'max z':>6s} {'asym gap':>9s} {'slope':>6s}")
        for c in rep["curves"]:
            print(f"  {c['protocol']:9s} {c['user']:4s} {c['max_closed_rel_dev']:10.2e} {c['max_z']:6.2f} "
                  f"{c['asym_rel_gap_top']:9.2e} {c['diversity_order']:6.3f}")
        for e in rep["errors"]:
            print(f"  error: {e}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
