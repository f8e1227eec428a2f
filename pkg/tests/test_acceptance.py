"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate

from semigf import (
    Dynamic,
    GeometryConfig,
    Method,
    OpenLoop,
    OutageQuery,
    RadioConfig,
    Scenario,
    User,
    diversity_order,
    outage,
    tau_th_average,
)
from semigf.channel import cdf_gain, cdf_gain_hyp, gain_coefficients, pdf_gain, sf_gain
from semigf.cli import EXIT_OK, main
from semigf.montecarlo import TrialConfig, point_seed, simulate_both, ks_validate_gain

GEO = GeometryConfig()
GRID9 = [90.0, 95.0, 100.0, 105.0, 110.0, 115.0, 120.0, 125.0, 130.0]
PROTOCOLS = ("dynamic", "openloop")
USERS = ("GB", "GF")


def report(n, ok, detail):
    print(f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def _query(sc, rho, proto, user, method=Method.EXACT, geo=GEO, radio_kw=None, tau_mult=1.0):
    sc = Scenario(sc)
    radio = RadioConfig(**(radio_kw or {})).with_rho_db(sc.swept_user, rho)
    p = Dynamic() if proto == "dynamic" else OpenLoop(tau_mult * tau_th_average(geo, radio, sc))
    return OutageQuery(geo, radio, p, user, method, sc)


def _op(*args, **kw):
    return outage(_query(*args, **kw)).value


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.time()
    c = gain_coefficients(GEO, 1.0)
    worst_cdf = 0.0
    for region in ("near", "far"):
        scale = c.b21 if region == "near" else c.b22
        for z in np.geomspace(1e-4, 300.0, 25):
            x = z / scale
            a, b = cdf_gain(region, c, x), cdf_gain_hyp(region, c, x)
            worst_cdf = max(worst_cdf, abs(a - b) / max(abs(a), 1e-300))
    worst_norm = 0.0
    edges = np.geomspace(1e-6 / c.b22, 1e4 / c.b21, 60)
    for region in ("near", "far"):
        tot = sum(integrate.quad(lambda x: pdf_gain(region, c, x), a, b, epsrel=1e-12, epsabs=0)[0]
                  for a, b in zip(edges[:-1], edges[1:]))
        tot += cdf_gain(region, c, edges[0]) + sf_gain(region, c, edges[-1])
        worst_norm = max(worst_norm, abs(tot - 1.0))
    ks = {r: ks_validate_gain(r, GEO, 1.0, 10**7, seed=2024) for r in ("near", "far")}
    neg = ks_validate_gain("near", GEO, 1.0, 10**6, seed=1, lambda_test=2.0)
    dt = time.time() - t0
    ok = worst_cdf <= 1e-8 and worst_norm <= 1e-6 and max(ks.values()) < 0.002 and neg > 0.05 and dt < 60
    report(1, ok, f"cdf forms rel dev {worst_cdf:.2e}, pdf norm dev {worst_norm:.2e}, "
                  f"KS near {ks['near']:.2e} far {ks['far']:.2e} (1e7), mismatched-lambda KS {neg:.3f}, {dt:.1f}s")
    return ok


def criterion_2():
    t0 = time.time()
    worst, fails = 0.0, []
    for sc in ("I", "II"):
        for proto in PROTOCOLS:
            for i, rho in enumerate((95.0, 110.0, 125.0)):
                q = _query(sc, rho, proto, "GB")
                cfg = TrialConfig(GEO, q.radio, Scenario(sc), q.protocol, 10**6, seed=point_seed(2024, i))
                est = simulate_both(cfg)
                for user in USERS:
                    ex = _op(sc, rho, proto, user)
                    z = est[User(user)].z_score(ex)
                    worst = max(worst, z)
                    if z > 3.0:
                        fails.append(f"S{sc} {proto} {user} {rho:g}dB z={z:.2f}")
    dt = time.time() - t0
    ok = not fails and dt < 300
    report(2, ok, f"24 checks at n=1e6, max |z| {worst:.2f}, {dt:.1f}s" + (f", failing: {fails}" if fails else ""))
    return ok


CLOSED_CASES = [("I", {}), ("II", {}), ("I", {"rate_GB": 0.5}), ("II", {"rate_GF": 0.5}),
                ("I", {"rate_GB": 0.5, "rate_GF": 0.3}), ("II", {"rate_GF": 0.5, "rate_GB": 0.3})]


def criterion_3():
    t0 = time.time()
    n, fails, worst = 0, [], 0.0
    for sc, kw in CLOSED_CASES:
        for proto in PROTOCOLS:
            for user in USERS:
                for rho in GRID9:
                    # the noise-free scenario II dynamic form is only claimed at high rho_GF
                    if sc == "II" and proto == "dynamic" and user == "GF" and rho < 110:
                        continue
                    ex = _op(sc, rho, proto, user, radio_kw=kw)
                    cl = _op(sc, rho, proto, user, Method.CLOSED, radio_kw=kw)
                    d = abs(cl - ex)
                    n += 1
                    if ex > 0:
                        worst = max(worst, min(d / ex, d / 1e-3))
                    if not (d <= 0.01 * ex or d <= 1e-3):
                        fails.append(f"S{sc} {kw} {proto} {user} {rho:g}")
    dt = time.time() - t0
    ok = not fails and dt < 60
    report(3, ok, f"{n} closed-form points within 1% or 1e-3, worst normalised dev {worst:.2e}, {dt:.1f}s"
                  + (f", failing: {fails[:5]}" if fails else ""))
    return ok


def criterion_4():
    fails, worst = [], 0.0
    for sc, kw in CLOSED_CASES:
        for proto in PROTOCOLS:
            for user in USERS:
                ex = _op(sc, 130.0, proto, user, radio_kw=kw)
                asym = _op(sc, 130.0, proto, user, Method.ASYM, radio_kw=kw)
                gap = abs(asym / ex - 1)
                worst = max(worst, gap)
                if gap > 0.05:
                    fails.append(f"S{sc} {kw} {proto} {user} gap={gap:.3f}")
    ok = not fails
    report(4, ok, f"{len(CLOSED_CASES) * 4} asymptotic forms at 130 dB, max rel gap {worst:.2e}"
                  + (f", failing: {fails}" if fails else ""))
    return ok


def _slope(sc, proto, user, lo, hi):
    pts = []
    for rho in np.linspace(lo, hi, 6):
        q = _query(sc, float(rho), proto, user)
        r = q.radio.rho_GB if Scenario(sc).swept_user is User.GB else q.radio.rho_GF
        pts.append((r, outage(q).value))
    return diversity_order(pts)


def criterion_5():
    ok, parts, low = True, [], []
    for sc in ("I", "II"):
        near = "GB" if sc == "I" else "GF"
        for proto in PROTOCOLS:
            for user in USERS:
                s = _slope(sc, proto, user, 140.0, 150.0)
                lo, hi = (0.9, 1.1) if user == near else (-0.05, 0.05)
                ok &= lo <= s <= hi
                parts.append(f"S{sc}/{proto}/{user}={s:.3f}")
                low.append(f"S{sc}/{proto}/{user}={_slope(sc, proto, user, 120.0, 130.0):.3f}")
    report(5, ok, "slopes over [140,150] dB: " + ", ".join(parts)
                  + "; for reference over [120,130] dB: " + ", ".join(low))
    return ok


def criterion_6():
    n_trials = 10**6
    fails, checks, tightest = [], 0, math.inf
    for sc in ("I", "II"):
        for i, rho in enumerate(GRID9):
            ests = {}
            for proto in PROTOCOLS:
                q = _query(sc, rho, proto, "GB")
                # common random numbers: both protocols see the same gains
                cfg = TrialConfig(GEO, q.radio, Scenario(sc), q.protocol, n_trials, seed=point_seed(7, i))
                ests[proto] = simulate_both(cfg)
            for user in USERS:
                d, o = ests["dynamic"][User(user)], ests["openloop"][User(user)]
                margin = 3.0 * math.hypot(d.std_err, o.std_err)
                checks += 1
                tightest = min(tightest, o.p_hat - d.p_hat + margin)
                if d.p_hat > o.p_hat + margin:
                    fails.append(f"S{sc} {user} {rho:g}dB dyn={d.p_hat:.3e} ol={o.p_hat:.3e}")
    ok = not fails
    report(6, ok, f"{checks} MC comparisons (n=1e6, 9-point grid, both scenarios), smallest slack {tightest:.2e}"
                  + (f", failing: {fails}" if fails else ""))
    return ok


def criterion_7():
    geos = {a: GeometryConfig(alpha=a) for a in (2.2, 2.8, 3.5)}
    held, broken = [], []
    for rho in GRID9:
        op = {a: _op("I", rho, "dynamic", "GB", geo=g) for a, g in geos.items()}
        opo = {a: _op("I", rho, "openloop", "GB", geo=g) for a, g in geos.items()}
        for name, v in (("dynamic", op), ("openloop", opo)):
            good = v[3.5] > v[2.8] > v[2.2]
            (held if good else broken).append(f"{name}@{rho:g}")
    ok = not broken
    ex = {a: _op("I", 110.0, "dynamic", "GB", geo=g) for a, g in geos.items()}
    report(7, ok, f"ordering 3.5>2.8>2.2 holds at {len(held)}/{len(held) + len(broken)} points "
                  f"(holds: {held}); at 110 dB dynamic OP = "
                  + ", ".join(f"a={a}: {v:.3e}" for a, v in ex.items())
                  + "; interference-limited regime favours larger alpha")
    return ok


def criterion_8():
    ok, worst_rise, strict = True, 0.0, []
    for rho in GRID9:
        v = [_op("I", rho, "openloop", "GF", tau_mult=m) for m in (10.0, 1.0, 0.1)]
        rise = max(v[1] - v[0], v[2] - v[1])
        worst_rise = max(worst_rise, rise)
        ok &= rise <= 1e-12
        if v[0] > v[1] > v[2]:
            strict.append(rho)
    ok &= bool(strict)
    report(8, ok, f"scenario I GF outage non-increasing as tau goes 10x->1x->0.1x at all {len(GRID9)} points "
                  f"(max rise {worst_rise:.1e}); strictly decreasing at {[f'{r:g}' for r in strict]} dB, "
                  "flat elsewhere because tau far exceeds the ring gains")
    return ok


def criterion_9(tmp):
    argv = ["sweep", "--method", "all", "--trials", "200000", "--seed", "31", "--grid", "90:130:10"]
    codes = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        codes.append(main(argv + ["--out", str(tmp / name), "--threads", threads]))
    files = [(tmp / n / "sweep.csv").read_bytes() for n in "abc"]
    fig = []
    for name, threads in (("fa", "1"), ("fb", "3")):
        codes.append(main(["figure", "fig3", "--trials", "100000", "--out", str(tmp / name), "--threads", threads]))
        fig.append(sorted((p.name, p.read_bytes()) for p in (tmp / name).glob("*.csv")))
    ok = all(c == EXIT_OK for c in codes) and files[0] == files[1] == files[2] and fig[0] == fig[1]
    report(9, ok, f"sweep CSV identical across 3 runs (threads 1,1,4): {files[0] == files[1] == files[2]}; "
                  f"figure CSVs identical across threads 1,3: {fig[0] == fig[1]}")
    return ok


# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys, tmp_path):
    fn = globals()[f"criterion_{n}"]
    with capsys.disabled():
        print()
        ok = fn(tmp_path) if n == 9 else fn()
    assert ok


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    results = {}
    with tempfile.TemporaryDirectory() as d:
        for n in range(1, 10):
            results[n] = globals()[f"criterion_{n}"](Path(d)) if n == 9 else globals()[f"criterion_{n}"]()
    print(f"{sum(results.values())}/9 criteria pass")
