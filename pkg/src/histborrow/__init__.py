"""Generalized power posteriors for borrowing strength from historical data.

The posterior combines the no-borrowing and full-borrowing pseudo-posteriors
``p0 = L pi0`` and ``p1 = L L0 pi0`` through a weighted power mean of order
``z = (1 + alpha) / 2``.
"""

__version__ = "0.1.0"

from .divergence import GridDensity, alpha_divergence, kl_divergence, normalize, tv_distance  # noqa: E402
from .posterior import (  # noqa: E402
    BorrowConfig,
    alpha_geodesic,
    classical_power_posterior_grid,
    divergence_objective,
    generalized_log_posterior,
    generalized_log_prior,
    generalized_posterior_grid,
)

__all__ = [
    "GridDensity", "alpha_divergence", "kl_divergence", "normalize", "tv_distance",
    "BorrowConfig", "alpha_geodesic", "classical_power_posterior_grid", "divergence_objective",
    "generalized_log_posterior", "generalized_log_prior", "generalized_posterior_grid",
]
