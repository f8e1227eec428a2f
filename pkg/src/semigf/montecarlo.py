"""Monte Carlo oracle for the joint (admitted and in outage) events.

Trials are drawn in fixed-size blocks, each with its own counter-derived
random stream, so the estimate depends only on (seed, n_trials) and not on
how blocks are grouped into chunks or spread over threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import (
    Dynamic,
    GeometryConfig,
    OpenLoop,
    RadioConfig,
    Scenario,
    User,
    cdf_gain,
    gain_coefficients,
    sample_gain,
)

# trials per independent random stream; never change without refreezing seeds
BLOCK_SIZE = 8192
THREADS_ENV = "SEMIGF_THREADS"


def default_threads() -> int:
    v = os.environ.get(THREADS_ENV)
    return max(1, int(v)) if v else 1


@dataclass(frozen=True)
class TrialConfig:
    geo: GeometryConfig = field(default_factory=GeometryConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    scenario: Scenario = Scenario.I
    protocol: OpenLoop | Dynamic = field(default_factory=Dynamic)
    n_trials: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if int(self.n_trials) < 1000:
            raise ValueError(f"n_trials must be >= 1000, got {self.n_trials}")
        if int(self.chunk_size) < 1:
            raise ValueError("chunk_size must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    n_trials: int
    admitted_fraction: float
    hits: int = 0

    @property
    def degenerate(self) -> bool:
        """p_hat in {0, 1}: the Gaussian std_err is zero and uninformative."""
        return self.hits in (0, self.n_trials)

    def z_score(self, value: float) -> float:
        se = max(self.std_err, math.sqrt(max(value * (1.0 - value), 0.0) / self.n_trials))
        if se == 0.0:
            return 0.0 if value == self.p_hat else math.inf
        return abs(value - self.p_hat) / se


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _block_counts(cfg: TrialConfig, block: int, n: int) -> np.ndarray:
    """Counts of (admitted, GB outage, GF outage) over n trials of one block."""
    rng = _block_rng(cfg.seed, block)
    geo, radio, sc = cfg.geo, cfg.radio, cfg.scenario
    g_gb = sample_gain(sc.region_of(User.GB), geo, radio.lambda_GB, rng, n)
    g_gf = sample_gain(sc.region_of(User.GF), geo, radio.lambda_GF, rng, n)
    rB, rF = radio.rho_GB, radio.rho_GF
    gB, gF = radio.gamma_GB, radio.gamma_GF
    rx_gb, rx_gf = rB * g_gb, rF * g_gf
    dyn = isinstance(cfg.protocol, Dynamic)

    if sc is Scenario.I:
        adm = rx_gf < rx_gb if dyn else g_gf < cfg.protocol.tau
        # GB decoded first against GF interference, then GF alone
        first_ok = rx_gb >= gB * (rx_gf + 1.0)
        out_first = adm & ~first_ok
        out_second = out_first | (adm & first_ok & (rx_gf < gF))
        out_gb, out_gf = out_first, out_second
    else:
        adm = rx_gf > rx_gb if dyn else g_gf > cfg.protocol.tau
        first_ok = rx_gf >= gF * (rx_gb + 1.0)
        out_first = adm & ~first_ok
        out_second = out_first | (adm & first_ok & (rx_gb < gB))
        out_gf, out_gb = out_first, out_second
    return np.array([adm.sum(), out_gb.sum(), out_gf.sum()], dtype=np.int64)


def _chunks(cfg: TrialConfig):
    """Chunks as lists of (block, size); chunk_size is rounded up to whole blocks."""
    n = int(cfg.n_trials)
    n_blocks = -(-n // BLOCK_SIZE)
    per_chunk = max(1, -(-int(cfg.chunk_size) // BLOCK_SIZE))
    blocks = [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range(n_blocks)]
    return [blocks[i : i + per_chunk] for i in range(0, n_blocks, per_chunk)]


def _chunk_counts(cfg, chunk):
    return sum((_block_counts(cfg, b, n) for b, n in chunk), np.zeros(3, dtype=np.int64))


def simulate_counts(cfg: TrialConfig, threads: int | None = None) -> np.ndarray:
    threads = default_threads() if threads is None else max(1, int(threads))
    chunks = _chunks(cfg)
    if threads == 1 or len(chunks) == 1:
        parts = [_chunk_counts(cfg, c) for c in chunks]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: _chunk_counts(cfg, c), chunks))
    # integer reduction: order and grouping cannot change the result
    return np.sum(parts, axis=0)


def _estimate(hits: int, admitted: int, n: int) -> McEstimate:
    p = hits / n
    return McEstimate(p, math.sqrt(p * (1.0 - p) / n), n, admitted / n, int(hits))


def simulate_outage(cfg: TrialConfig, user, threads: int | None = None) -> McEstimate:
    """Frequency of the joint event {admitted and in outage} for ``user``."""
    user = User(user)
    adm, out_gb, out_gf = simulate_counts(cfg, threads)
    return _estimate(int(out_gb if user is User.GB else out_gf), int(adm), int(cfg.n_trials))


def simulate_both(cfg: TrialConfig, threads: int | None = None) -> dict:
    adm, out_gb, out_gf = simulate_counts(cfg, threads)
    n = int(cfg.n_trials)
    return {User.GB: _estimate(int(out_gb), int(adm), n), User.GF: _estimate(int(out_gf), int(adm), n)}


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def simulate_curve(cfg: TrialConfig, user, rho_grid, swept=None, threads=None):
    """One estimate per grid point (dB) of the swept user's transmit SNR."""
    grid = [float(r) for r in rho_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("rho grid must be sorted ascending")
    swept = cfg.scenario.swept_user if swept is None else User(swept)
    out = []
    for i, r in enumerate(grid):
        c = TrialConfig(cfg.geo, cfg.radio.with_rho_db(swept, r), cfg.scenario, cfg.protocol,
                        cfg.n_trials, point_seed(cfg.seed, i), cfg.chunk_size)
        out.append((r, simulate_outage(c, user, threads)))
    return out


def ks_validate_gain(region: str, geo: GeometryConfig, lambda_G: float, n: int, seed: int = 0,
                     lambda_test: float | None = None) -> float:
    """KS distance between sampled gains and the analytic CDF (optionally with another lambda)."""
    rng = np.random.default_rng(seed)
    x = sample_gain(region, geo, lambda_G, rng, n)
    c = gain_coefficients(geo, lambda_G if lambda_test is None else lambda_test)
    return float(stats.kstest(x, lambda t: cdf_gain(region, c, t)).statistic)
