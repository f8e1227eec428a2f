"""Numerical convergence of the closed forms and the sensitivity of the figure orderings.

Prints
  * closed-form value vs Chebyshev order S (doubling) against Exact,
  * the Scenario I GB ordering over alpha on the 9-point grid,
  * the Scenario I GF ordering over tau multipliers.
"""
import numpy as np

from semigf import Dynamic, GeometryConfig, Method, OpenLoop, OutageQuery, RadioConfig, Scenario, outage, tau_th_average
from semigf import scenario1 as s1
from semigf import scenario2 as s2

GRID = np.arange(90.0, 131.0, 5.0)


def q(sc, rho, proto, user, method=Method.EXACT, geo=GeometryConfig(), tau_mult=1.0, **kw):
    sc = Scenario(sc)
    radio = RadioConfig(**kw).with_rho_db(sc.swept_user, rho)
    p = Dynamic() if proto == "dynamic" else OpenLoop(tau_mult * tau_th_average(geo, radio, sc))
    return OutageQuery(geo, radio, p, user, method, sc)


def quadrature_orders():
    print("closed form vs Chebyshev order S (relative deviation from Exact)")
    cases = [
        ("S1 GF dynamic 120dB", lambda x, S: s1.op_gf_dynamic_s1(x, S, form="quadrature"), ("I", 120.0, "dynamic", "GF"), {}),
        ("S1 GB dynamic 110dB, gB<1", s1.op_gb_dynamic_s1, ("I", 110.0, "dynamic", "GB"), {"rate_GB": 0.5}),
        ("S2 GB dynamic 110dB", s2.op_gb_dynamic_s2, ("II", 110.0, "dynamic", "GB"), {}),
        ("S2 GF openloop 100dB", s2.op_gf_openloop_s2, ("II", 100.0, "openloop", "GF"), {}),
    ]
    for label, fn, args, kw in cases:
        ex = outage(q(*args, **kw)).value
        devs = []
        for S in (25, 50, 100, 200, 400):
            v = fn(q(*args, Method.CLOSED, **kw), S=S).value
            devs.append(f"S={S}: {abs(v / ex - 1):.2e}")
        print(f"  {label:28s} " + "  ".join(devs))


def alpha_ordering():
    print("\nScenario I GB outage (dynamic) over alpha")
    print("  rho   " + "  ".join(f"a={a:<9}" for a in (2.2, 2.8, 3.5)))
    for rho in GRID:
        vals = [outage(q("I", rho, "dynamic", "GB", geo=GeometryConfig(alpha=a))).value for a in (2.2, 2.8, 3.5)]
        print(f"  {rho:5.0f} " + "  ".join(f"{v:.4e}" for v in vals))


def tau_ordering():
    print("\nScenario I GF outage (open-loop) over tau multiplier")
    print("  rho   " + "  ".join(f"x{m:<10}" for m in (10.0, 1.0, 0.1)))
    for rho in GRID:
        vals = [outage(q("I", rho, "openloop", "GF", tau_mult=m)).value for m in (10.0, 1.0, 0.1)]
        print(f"  {rho:5.0f} " + "  ".join(f"{v:.6e}" for v in vals))


if __name__ == "__main__":
    quadrature_orders()
    alpha_ordering()
    tau_ordering()
