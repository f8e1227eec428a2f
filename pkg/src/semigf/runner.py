"""Sweeps, figure reproduction and the analytic-vs-simulation report."""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy

from . import __version__, outage
from .channel import GeometryConfig, Scenario, User
from .config import RunSpec, figure_preset
from .montecarlo import TrialConfig, point_seed, simulate_both
from .outage import Method, OutageQuery, diversity_order
from .outage import BranchDomainError
from .special import SeriesNonConvergence

COLUMNS = ("rho_db", "user", "protocol", "method", "op_value", "std_err", "branch", "error")
DOMAIN_ERRORS = (BranchDomainError, SeriesNonConvergence, ArithmeticError, ValueError)


@dataclass(frozen=True)
class Row:
    rho_db: float
    user: str
    protocol: str
    method: str
    op_value: float | None
    std_err: float | None = None
    branch: str = ""
    error: str = ""

    def cells(self) -> list[str]:
        fmt = lambda v: "" if v is None else f"{v:.10e}"
        return [f"{self.rho_db:g}", self.user, self.protocol, self.method, fmt(self.op_value),
                fmt(self.std_err), self.branch, self.error]


def _analytic(spec: RunSpec, geo, radio, proto, user, method, rho: float) -> Row:
    q = OutageQuery(geo, radio, proto, user, method, spec.scenario)
    try:
        est = outage(q)
        return Row(rho, user, proto.name, method, est.value, None, est.branch)
    except DOMAIN_ERRORS as e:
        return Row(rho, user, proto.name, method, None, None, "", f"{type(e).__name__}: {e}")


def _point_rows(spec: RunSpec, index: int, rho_db: float, analytic_geo=None) -> list[Row]:
    radio = spec.radio_at(rho_db)
    geo_a = analytic_geo or spec.geometry
    rows = []
    for j, pname in enumerate(spec.protocols):
        proto = spec.protocol_at(pname, radio)
        mc = None
        if "mc" in spec.methods:
            seed = point_seed(spec.mc.seed, index * len(spec.protocols) + j)
            cfg = TrialConfig(spec.geometry, radio, spec.scenario, proto, spec.mc.trials, seed, spec.mc.chunk_size)
            mc = simulate_both(cfg, threads=1)
        for user in spec.users:
            for m in spec.methods:
                if m == "mc":
                    e = mc[User(user)]
                    rows.append(Row(rho_db, user, pname, "mc", e.p_hat, e.std_err, "degenerate" if e.degenerate else ""))
                else:
                    rows.append(_analytic(spec, geo_a, radio, proto, user, m, rho_db))
    return rows


def run_sweep(spec: RunSpec, analytic_geo: GeometryConfig | None = None) -> list[Row]:
    """Rows in grid order; grid points may be evaluated concurrently."""
    grid = spec.grid.values()
    if not grid:
        raise ValueError("empty rho grid")
    task = lambda item: _point_rows(spec, item[0], item[1], analytic_geo)
    if spec.threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(spec.threads) as pool:
            parts = list(pool.map(task, enumerate(grid)))
    else:
        parts = [task(it) for it in enumerate(grid)]
    return [r for part in parts for r in part]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def manifest(spec_dict: dict, seeds, wall_time: float, outputs, extra=None) -> dict:
    m = {
        "inputs": spec_dict,
        "versions": {
            "semigf": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "seeds": seeds,
        "outputs": list(outputs),
        "wall_time_s": round(wall_time, 3),
    }
    if extra:
        m.update(extra)
    return m


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# figures


def reproduce_figure(fig_id: str, out_dir, base: RunSpec | None = None) -> list[str]:
    import os

    t0 = time.time()
    preset = figure_preset(fig_id, base)
    os.makedirs(out_dir, exist_ok=True)
    files, families = [], []
    for label, spec in preset.families:
        safe = "".join(ch if ch.isalnum() or ch in "=.-" else "_" for ch in label)
        name = f"{fig_id}_{safe}.csv"
        write_csv(run_sweep(spec), os.path.join(out_dir, name))
        files.append(name)
        families.append({"label": label, "file": name, "spec": spec.to_dict()})
    extra = {
        "figure": fig_id,
        "description": preset.description,
        "axes": {"x": preset.swept_label, "y": "outage probability (log scale)"},
        "families": families,
    }
    seeds = [s.mc.seed for _, s in preset.families]
    write_json(manifest({}, seeds, time.time() - t0, files, extra), os.path.join(out_dir, f"{fig_id}_manifest.json"))
    return files


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class Thresholds:
    closed_rel: float = 0.01
    closed_abs: float = 1e-3
    z_max: float = 3.0
    asym_rel: float = 0.05
    near_slope: tuple = (0.9, 1.1)
    far_slope: tuple = (-0.05, 0.05)
    diversity_window: tuple = (140.0, 150.0)


def near_user(scenario: Scenario) -> User:
    return User.GB if scenario is Scenario.I else User.GF


def compare_report(spec: RunSpec, thresholds: Thresholds = Thresholds(), corrupt_alpha: float = 0.0) -> dict:
    """Exact, closed form, asymptotic and MC on one grid plus the acceptance gates.

    ``corrupt_alpha`` perturbs the path-loss exponent seen by the analytic
    side only; it exists to check that the gate trips.
    """
    geo_a = replace(spec.geometry, alpha=spec.geometry.alpha + corrupt_alpha) if corrupt_alpha else None
    full = replace(spec, methods=("exact", "closed", "asym", "mc"))
    rows = run_sweep(full, analytic_geo=geo_a)
    grid = full.grid.values()
    top = grid[-1]
    table = {(r.rho_db, r.user, r.protocol, r.method): r for r in rows}
    curves = []
    ok = True
    errors = [f"{r.rho_db:g} {r.user} {r.protocol} {r.method}: {r.error}" for r in rows if r.error]
    for pname in full.protocols:
        for user in full.users:
            c = {"user": user, "protocol": pname}
            dev_ok, max_abs, max_rel, max_z = True, 0.0, 0.0, 0.0
            for rho in grid:
                ex = table[(rho, user, pname, "exact")].op_value
                cl = table[(rho, user, pname, "closed")].op_value
                mc = table[(rho, user, pname, "mc")]
                if ex is None or cl is None:
                    continue
                d = abs(cl - ex)
                rel = d / ex if ex > 0 else (0.0 if d == 0 else math.inf)
                max_abs, max_rel = max(max_abs, d), max(max_rel, rel)
                dev_ok &= rel <= thresholds.closed_rel or d <= thresholds.closed_abs
                se = max(mc.std_err, math.sqrt(ex * (1 - ex) / full.mc.trials))
                max_z = max(max_z, abs(ex - mc.op_value) / se if se > 0 else 0.0)
            ex_top = table[(top, user, pname, "exact")].op_value
            as_top = table[(top, user, pname, "asym")].op_value
            gap = abs(as_top - ex_top) / ex_top if ex_top and as_top is not None else math.inf
            slope = _diversity(full, pname, user, thresholds.diversity_window, geo_a)
            lo, hi = thresholds.near_slope if User(user) is near_user(full.scenario) else thresholds.far_slope
            c.update(
                max_closed_abs_dev=max_abs,
                max_closed_rel_dev=max_rel,
                closed_ok=bool(dev_ok),
                max_z=max_z,
                z_ok=bool(max_z <= thresholds.z_max),
                asym_rel_gap_top=gap,
                asym_ok=bool(gap <= thresholds.asym_rel),
                diversity_order=slope,
                diversity_ok=bool(lo <= slope <= hi),
            )
            ok &= c["closed_ok"] and c["z_ok"] and c["asym_ok"] and c["diversity_ok"]
            curves.append(c)
    return {"scenario": full.scenario.value, "grid": grid, "curves": curves, "errors": errors,
            "passed": bool(ok and not errors), "rows": rows}


def _diversity(spec: RunSpec, pname: str, user: str, window, geo_a=None) -> float:
    lo, hi = window
    pts = []
    for rho in np.linspace(lo, hi, 6):
        radio = spec.radio_at(float(rho))
        q = OutageQuery(geo_a or spec.geometry, radio, spec.protocol_at(pname, radio), user, Method.EXACT, spec.scenario)
        pts.append((radio.rho_GB if spec.swept_user is User.GB else radio.rho_GF, outage(q).value))
    return diversity_order(pts)
