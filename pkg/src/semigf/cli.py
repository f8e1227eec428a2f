"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 acceptance-gate failure,
3 numeric-domain failure (some row carries an error).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

from .config import FIGURE_IDS, METHODS, McSpec, GridSpec, SpecError, load_spec
from .montecarlo import THREADS_ENV
from .runner import compare_report, manifest, reproduce_figure, rows_to_csv, run_sweep, write_json

EXIT_OK, EXIT_USAGE, EXIT_GATE, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML run specification")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    common.add_argument("--grid", help="start:stop:step in dB")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--method", choices=METHODS + ("all",), action="append",
                        help="evaluation method, repeatable")
    common.add_argument("--threads", type=int, help=f"worker threads (env {THREADS_ENV})")

    p = _Parser(prog="semigf", description="Outage probability of semi-grant-free NOMA")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analytic", parents=[common], help="analytic methods on a grid")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo on a grid")
    sub.add_parser("sweep", parents=[common], help="any mix of methods on a grid")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    fig.add_argument("id", choices=FIGURE_IDS)
    rep = sub.add_parser("report", parents=[common], help="analytic vs simulation gates")
    rep.add_argument("--corrupt-alpha", type=float, default=0.0, help=argparse.SUPPRESS)
    return p


def _methods(args, default):
    if not args.method:
        return default
    if "all" in args.method:
        return METHODS
    return tuple(dict.fromkeys(args.method))


def _threads(args) -> int:
    if args.threads is not None:
        t = args.threads
    else:
        env = os.environ.get(THREADS_ENV)
        try:
            t = int(env) if env else 1
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer") from None
    if t < 1:
        raise UsageError("--threads must be >= 1")
    return t


def resolve_spec(args):
    spec = load_spec(args.config)
    mc = spec.mc
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise SpecError("seed", "must be a 64-bit unsigned integer")
        mc = replace(mc, seed=args.seed)
    if args.trials is not None:
        if args.trials < 1000:
            raise SpecError("trials", "must be >= 1000")
        mc = replace(mc, trials=args.trials)
    spec = replace(spec, mc=mc, threads=_threads(args))
    if args.grid:
        spec = replace(spec, grid=GridSpec.parse(args.grid))
        spec.grid.values()
    if args.command == "analytic":
        methods = _methods(args, ("exact",))
        if "mc" in methods:
            raise UsageError("analytic does not run Monte Carlo; use simulate or sweep")
    elif args.command == "simulate":
        methods = ("mc",)
    elif args.command == "sweep":
        methods = _methods(args, spec.methods)
    else:
        methods = _methods(args, spec.methods)
    return replace(spec, methods=methods)


def _write_run(out, name, spec, rows, t0):
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, f"{name}.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))
    m = manifest(spec.to_dict(), [spec.mc.seed], time.time() - t0, [f"{name}.csv"], {"command": name})
    write_json(m, os.path.join(out, f"{name}_manifest.json"))
    return csv_path


def main(argv=None) -> int:
    t0 = time.time()
    try:
        args = build_parser().parse_args(argv)
        spec = resolve_spec(args)
    except (UsageError, SpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "figure":
        files = reproduce_figure(args.id, args.out, spec)
        print("\n".join(os.path.join(args.out, f) for f in files))
        return EXIT_OK

    if args.command == "report":
        rep = compare_report(spec, corrupt_alpha=args.corrupt_alpha)
        _write_run(args.out, "report", replace(spec, methods=("exact", "closed", "asym", "mc")), rep["rows"], t0)
        summary = {k: v for k, v in rep.items() if k != "rows"}
        write_json(summary, os.path.join(args.out, "report_summary.json"))
        print(json.dumps(summary, indent=2, default=str))
        if rep["errors"]:
            return EXIT_DOMAIN
        return EXIT_OK if rep["passed"] else EXIT_GATE

    rows = run_sweep(spec)
    path = _write_run(args.out, args.command, spec, rows, t0)
    print(path)
    bad = [r for r in rows if r.error]
    for r in bad:
        print(f"warning: rho={r.rho_db:g} {r.user} {r.protocol} {r.method}: {r.error}", file=sys.stderr)
    return EXIT_DOMAIN if bad else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
