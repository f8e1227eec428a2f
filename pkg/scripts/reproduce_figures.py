"""Regenerate the CSV data behind every figure preset and summarise the trends.

    python3 scripts/reproduce_figures.py --out results/figures --trials 1000000
"""
import argparse
import csv
import os
from dataclasses import replace

from semigf.config import FIGURE_IDS, RunSpec, McSpec
from semigf.runner import reproduce_figure


def _floor(path, user, protocol, rho=130.0):
    with open(path) as fh:
        for r in csv.DictReader(fh):
            if (float(r["rho_db"]) == rho and r["user"] == user and r["protocol"] == protocol
                    and r["method"] == "exact"):
                return float(r["op_value"])
    return float("nan")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/figures")
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", nargs="*", choices=FIGURE_IDS)
    args = ap.parse_args()

    base = replace(RunSpec(), mc=McSpec(trials=args.trials, seed=args.seed))
    written = {}
    for fid in args.only or FIGURE_IDS:
        written[fid] = reproduce_figure(fid, args.out, base)
        print(f"{fid}: {', '.join(written[fid])}")

    # far-user error floors at the top of the grid, to read off the geometry trends
    for fid, user in (("fig5", "GB"), ("fig6", "GB")):
        if fid not in written:
            continue
        print(f"\n{fid} far-user ({user}) floor at 130 dB, dynamic / open-loop:")
        for name in written[fid]:
            p = os.path.join(args.out, name)
            print(f"  {name:32s} {_floor(p, user, 'dynamic'):.4e}  {_floor(p, user, 'openloop'):.4e}")


if __name__ == "__main__":
    main()
