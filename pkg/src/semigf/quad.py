"""Composite Chebyshev-Gauss sums on panels adapted to the far-gain scale."""
from __future__ import annotations

import math

import numpy as np

from .special import cheb_gauss_integrate

# panel edges per decade of gain between the two characteristic scales
PANELS_PER_DECADE = 2


def gain_panel_edges(far, lo: float, hi: float) -> list[float]:
    """Split [lo, hi] at log-spaced points spanning 1e-2/b22 .. 1e2/b21."""
    a, b = 1e-2 / far.b22, 1e2 / far.b21
    n = max(2, int(math.ceil(PANELS_PER_DECADE * math.log10(b / a))) + 1)
    inner = [p for p in np.geomspace(a, b, n) if lo < p < hi]
    return [lo] + inner + [hi]


def cheb_panels(f, lo: float, hi: float, far, S: int = 100) -> float:
    """Chebyshev-Gauss rule of order S applied on each panel of [lo, hi].

    A single panel is enough when the interval is comparable to the gain
    scale; wide intervals (e.g. an open-loop threshold far above typical
    gains) need the split to keep S fixed.
    """
    if not hi > lo:
        return 0.0
    edges = gain_panel_edges(far, lo, hi)
    return float(sum(cheb_gauss_integrate(f, a, b, S) for a, b in zip(edges[:-1], edges[1:])))


def cheb_panels_reciprocal(g, lo_u: float, hi_u: float, far, S: int = 100) -> float:
    """Chebyshev-Gauss panels in u = 1/x for integrands written in u."""
    if not hi_u > lo_u:
        return 0.0
    x_edges = gain_panel_edges(far, 1.0 / hi_u, 1.0 / lo_u if lo_u > 0 else math.inf)
    u_edges = sorted({hi_u, lo_u} | {1.0 / x for x in x_edges[1:-1]})
    return float(sum(cheb_gauss_integrate(g, a, b, S) for a, b in zip(u_edges[:-1], u_edges[1:])))
