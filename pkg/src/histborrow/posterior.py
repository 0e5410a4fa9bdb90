"""Generalized power posteriors, the matching prior, and dual alpha-geodesics.

Given the no-borrowing pseudo-posterior ``p0 = L * pi0`` and the
full-borrowing pseudo-posterior ``p1 = L * L0 * pi0``, the generalized
power posterior is the normalized power mean

    g* ∝ {(1 - xi) p0^z + xi p1^z}^(1/z),   z = (1 + alpha) / 2,

which minimizes ``(1 - xi) D_alpha[g || p0] + xi D_alpha[g || p1]``.  As
``z -> 0`` it becomes the weighted geometric mean ``p0^(1-xi) p1^xi``, the
classical power posterior.

p0 and p1 must be given on the likelihood-times-prior scale.  The power mean
is not invariant to rescaling one of them independently, so pre-normalizing
either argument changes the answer.  For unbounded parameter spaces the grid
is the operative domain: all normalizing integrals are taken over it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergence import GridDensity, _check_same_grid, alpha_divergence, normalize
from .errors import GeometricLimitUnsupported

GEOMETRIC_Z = 1e-8


@dataclass(frozen=True)
class BorrowConfig:
    """Borrowing weight ``xi`` and divergence parameter ``alpha``.

    ``alpha = -1`` is accepted and selects the geometric (classical power
    posterior) limit; values below -1 are rejected.
    """

    xi: float
    alpha: float
    z: float = field(init=False)
    geometric_limit: bool = field(init=False)

    def __post_init__(self):
        xi = float(self.xi)
        alpha = float(self.alpha)
        if not (0.0 <= xi <= 1.0) or not np.isfinite(xi):
            raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
        if not np.isfinite(alpha) or alpha < -1.0:
            raise ValueError(f"alpha must be >= -1, got {alpha!r}")
        z = 0.5 * (1.0 + alpha)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "geometric_limit", abs(z) < GEOMETRIC_Z)

    @classmethod
    def from_z(cls, xi, z):
        return cls(xi, 2.0 * z - 1.0)


def power_mean_log(log_a, log_b, w, z):
    """Log of ``{(1-w) a^z + w b^z}^(1/z)`` evaluated in log space.

    ``w`` in {0, 1} returns the matching argument untouched, and ``z``
    below 1e-8 in magnitude switches to the geometric mean.
    """
    log_a = np.asarray(log_a, dtype=float)
    log_b = np.asarray(log_b, dtype=float)
    if w == 0.0:
        return log_a.copy() if log_a.ndim else float(log_a)
    if w == 1.0:
        return log_b.copy() if log_b.ndim else float(log_b)
    if abs(z) < GEOMETRIC_Z:
        with np.errstate(invalid="ignore"):
            out = (1.0 - w) * log_a + w * log_b
        # -inf times a positive weight stays -inf; guard nan from -inf + inf
        out = np.where(np.isneginf(log_a) | np.isneginf(log_b), -np.inf, out)
        return out if out.ndim else float(out)
    with np.errstate(invalid="ignore"):
        ta = np.log1p(-w) + z * log_a
        tb = np.log(w) + z * log_b
    out = np.logaddexp(ta, tb) / z
    return out if out.ndim else float(out)


def generalized_log_posterior(log_p0, log_p1, cfg):
    """Unnormalized log generalized power posterior at one or many points."""
    return power_mean_log(log_p0, log_p1, cfg.xi, cfg.z)


def generalized_posterior_grid(p0, p1, cfg):
    """Normalized generalized power posterior on the shared grid of p0, p1."""
    _check_same_grid(p0, p1)
    lv = generalized_log_posterior(p0.log_vals, p1.log_vals, cfg)
    return normalize(GridDensity(p0.xs, lv))


def classical_power_posterior_grid(log_L, log_L0, log_pi0, xi):
    """Normalized ``L * L0^xi * pi0``, the KL-optimal power posterior."""
    _check_same_grid(log_L, log_L0)
    _check_same_grid(log_L, log_pi0)
    xi = float(xi)
    if xi == 0.0:
        lv = log_L.log_vals + log_pi0.log_vals
    else:
        lv = log_L.log_vals + xi * log_L0.log_vals + log_pi0.log_vals
    return normalize(GridDensity(log_L.xs, lv))


def generalized_log_prior(log_pi0, log_L0, cfg):
    """Log generalized power prior ``pi0 {(1-xi) + xi L0^z}^(1/z)``.

    Multiplying by the current likelihood and normalizing gives the same
    density as :func:`generalized_posterior_grid`.
    """
    xi = cfg.xi
    log_pi0 = np.asarray(log_pi0, dtype=float)
    log_L0 = np.asarray(log_L0, dtype=float)
    if xi == 0.0:
        out = log_pi0 + 0.0
    elif xi == 1.0:
        out = log_pi0 + log_L0
    elif cfg.geometric_limit:
        raise GeometricLimitUnsupported("the generalized prior needs z != 0 when 0 < xi < 1")
    else:
        out = log_pi0 + np.logaddexp(np.log1p(-xi), np.log(xi) + cfg.z * log_L0) / cfg.z
    return out if out.ndim else float(out)


def divergence_objective(g, p0, p1, xi, alpha):
    """``(1 - xi) D_alpha[g || p0] + xi D_alpha[g || p1]`` on normalized grids."""
    xi = float(xi)
    if xi == 0.0:
        return alpha_divergence(g, p0, alpha)
    if xi == 1.0:
        return alpha_divergence(g, p1, alpha)
    return (1.0 - xi) * alpha_divergence(g, p0, alpha) + xi * alpha_divergence(g, p1, alpha)


def alpha_geodesic(p, q, t, alpha):
    """Point at parameter ``t`` on the dual alpha-geodesic from p to q.

    The path is ``C(t) {(1-t) p^z + t q^z}^(1/z)``; with ``t = xi`` it is the
    generalized power posterior of (p, q).
    """
    _check_same_grid(p, q)
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t!r}")
    cfg = BorrowConfig(t, alpha)
    return generalized_posterior_grid(p, q, cfg)
