"""Busy-period losses in single-server loss queues.

Simulation of ``A/B/1/n`` busy periods, the comparison branching
processes, closed-form bounds on losses, and stochastic-order checks.
"""

__version__ = "0.1.0"

from .analytics import BoundSet, SystemModel, bounds_for, compute_r, solve_phi, tau_pmf  # noqa: E402
from .distributions import DistributionSpec, classify  # noqa: E402

__all__ = [
    "BoundSet",
    "DistributionSpec",
    "SystemModel",
    "bounds_for",
    "classify",
    "compute_r",
    "solve_phi",
    "tau_pmf",
]
