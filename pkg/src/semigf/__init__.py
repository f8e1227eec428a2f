"""Outage analysis of semi-grant-free NOMA with open-loop and dynamic admission."""
from .channel import (
    Dynamic,
    GeometryConfig,
    OpenLoop,
    RadioConfig,
    Scenario,
    User,
    cdf_gain,
    pdf_gain,
    sample_gain,
    sf_gain,
    tau_th_average,
)
from .outage import (
    BranchDomainError,
    Method,
    OutageEstimate,
    OutageQuery,
    OutageQueryS1,
    OutageQueryS2,
    diversity_order,
)
from .special import SeriesControl, SeriesNonConvergence

__version__ = "0.1.0"


def outage(q: OutageQuery) -> OutageEstimate:
    """Evaluate any outage query with the scenario's dispatcher."""
    from . import scenario1, scenario2

    return scenario1.outage_s1(q) if q.scenario is Scenario.I else scenario2.outage_s2(q)
