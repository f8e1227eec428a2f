import math

import numpy as np
import pytest

from semigf import Dynamic, GeometryConfig, OpenLoop, RadioConfig, Scenario, User, outage, tau_th_average
from semigf.channel import sf_gain
from semigf.montecarlo import (
    BLOCK_SIZE,
    THREADS_ENV,
    McEstimate,
    TrialConfig,
    default_threads,
    point_seed,
    simulate_both,
    simulate_counts,
    simulate_curve,
    simulate_outage,
)
from semigf.outage import OutageQuery, far_integral

GEO = GeometryConfig()


def test_trial_config_validation():
    with pytest.raises(ValueError):
        TrialConfig(n_trials=999)
    with pytest.raises(ValueError):
        TrialConfig(chunk_size=0)
    with pytest.raises(ValueError):
        TrialConfig(seed=-1)
    assert TrialConfig(scenario="II").scenario is Scenario.II


def test_zero_thresholds_give_zero_outage():
    radio = RadioConfig(rate_GB=1e-12, rate_GF=1e-12)
    for sc in Scenario:
        for proto in (Dynamic(), OpenLoop(1e-6)):
            est = simulate_both(TrialConfig(GEO, radio, sc, proto, 20_000, seed=5))
            for e in est.values():
                assert e.p_hat == 0.0 and e.std_err == 0.0 and e.degenerate


def test_estimate_fields():
    e = simulate_outage(TrialConfig(n_trials=10_000, seed=1), "GF")
    assert 0 <= e.p_hat <= 1 and 0 <= e.admitted_fraction <= 1
    assert e.std_err == pytest.approx(math.sqrt(e.p_hat * (1 - e.p_hat) / e.n_trials))
    assert e.n_trials == 10_000


def test_z_score_uses_hypothesised_value_when_degenerate():
    e = McEstimate(0.0, 0.0, 10**6, 0.5, 0)
    # a 3.7e-7 event is expected 0.37 times: observing none is no evidence against it
    assert e.z_score(3.7e-7) < 1.0
    assert e.z_score(0.0) == 0.0


@pytest.mark.parametrize("chunk", [1, BLOCK_SIZE, 3 * BLOCK_SIZE + 5, 10**6])
def test_chunk_size_invariance(chunk):
    base = TrialConfig(n_trials=50_000, seed=42)
    ref = simulate_counts(base)
    cfg = TrialConfig(n_trials=50_000, seed=42, chunk_size=chunk)
    assert np.array_equal(simulate_counts(cfg), ref)


def test_thread_count_invariance(monkeypatch):
    cfg = TrialConfig(n_trials=60_000, seed=7, chunk_size=BLOCK_SIZE)
    ref = simulate_counts(cfg, threads=1)
    assert np.array_equal(simulate_counts(cfg, threads=4), ref)
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    assert np.array_equal(simulate_counts(cfg), ref)


def test_different_seeds_differ():
    a = simulate_counts(TrialConfig(n_trials=50_000, seed=1))
    b = simulate_counts(TrialConfig(n_trials=50_000, seed=2))
    assert not np.array_equal(a, b)
    assert point_seed(0, 1) != point_seed(0, 2)


def test_matches_exact_scenario1_gb_dynamic_110():
    radio = RadioConfig().with_rho_db("GB", 110)
    est = simulate_outage(TrialConfig(GEO, radio, Scenario.I, Dynamic(), 10**6, seed=11), "GB")
    ex = outage(OutageQuery(GEO, radio, Dynamic(), "GB")).value
    assert abs(est.p_hat - ex) <= 3 * est.std_err


def test_admitted_fraction_dynamic_scenario1():
    radio = RadioConfig().with_rho_db("GB", 100)
    est = simulate_outage(TrialConfig(GEO, radio, Scenario.I, Dynamic(), 10**6, seed=12), "GB")
    q = OutageQuery(GEO, radio, Dynamic(), "GB")
    c = radio.rho_GF / radio.rho_GB
    # Pr{rF gF < rB gB} = int sf_near(c y) f_far(y) dy
    p, _ = far_integral(lambda y: sf_gain("near", q.near, c * y), q.far)
    sigma = math.sqrt(p * (1 - p) / est.n_trials)
    assert abs(est.admitted_fraction - p) <= 3 * sigma


def test_simulate_curve_scenario1_trends():
    grid = [90.0, 100.0, 110.0, 120.0, 130.0]
    radio = RadioConfig()
    cfg_d = TrialConfig(GEO, radio, Scenario.I, Dynamic(), 200_000, seed=3)
    gb = simulate_curve(cfg_d, "GB", grid)
    assert [r for r, _ in gb] == grid
    for (_, a), (_, b) in zip(gb, gb[1:]):
        assert b.p_hat <= a.p_hat + 3 * math.hypot(a.std_err, b.std_err)
    # the far user's curve flattens: the last two points agree within noise
    gf = simulate_curve(cfg_d, "GF", grid)
    a, b = gf[-2][1], gf[-1][1]
    assert abs(a.p_hat - b.p_hat) <= 3 * math.hypot(a.std_err, b.std_err) + 0.1 * a.p_hat
    with pytest.raises(ValueError):
        simulate_curve(cfg_d, "GB", [100.0, 90.0])


def test_simulate_curve_sweeps_named_user():
    cfg = TrialConfig(GEO, RadioConfig(), Scenario.II, Dynamic(), 20_000, seed=3)
    out = simulate_curve(cfg, User.GF, [100.0, 110.0])
    assert len(out) == 2


def test_open_loop_admission_matches_threshold():
    radio = RadioConfig().with_rho_db("GF", 110)
    tau = tau_th_average(GEO, radio, Scenario.II)
    est = simulate_outage(TrialConfig(GEO, radio, Scenario.II, OpenLoop(tau), 200_000, seed=8), "GF")
    q = OutageQuery(GEO, radio, OpenLoop(tau), "GF", scenario=Scenario.II)
    p = sf_gain("near", q.near, tau)
    assert abs(est.admitted_fraction - p) <= 3 * math.sqrt(p * (1 - p) / est.n_trials)
