"""Simulation checks of posterior consistency and leading-order variance.

Current and historical samples of equal size are drawn from the same
model, the generalized posterior is built on a data-adaptive grid, and
either the mass outside ``|theta - theta0| <= eps`` or the grid variance is
recorded.  The Fisher-information leading term for the variance is
``1 / (n I + xi n0 I0)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import GridDensity, normalize
from .errors import UnsupportedFamily
from .models import (
    BetaBernoulliBorrowModel,
    GaussianBorrowModel,
    beta_bernoulli_log_p0,
    beta_bernoulli_log_p1,
    gaussian_log_p0,
    gaussian_log_p1,
)
from .posterior import power_mean_log

FAMILIES = ("gaussian", "beta")


@dataclass(frozen=True)
class ConsistencySweepResult:
    sample_sizes: np.ndarray
    outside_mass: np.ndarray
    outside_mass_sd: np.ndarray
    epsilon: float
    replicates: int


def _check_family(family):
    if family not in FAMILIES:
        raise UnsupportedFamily(f"family must be one of {FAMILIES}, got {family!r}")


def fisher_information(family, theta0, sigma2=1.0):
    _check_family(family)
    if family == "gaussian":
        return 1.0 / sigma2
    return 1.0 / (theta0 * (1.0 - theta0))


def leading_variance(family, theta0, n, n0, xi, sigma2=1.0):
    """``(1/n) [I + (xi n0 / n) I0]^(-1)`` with ``I0 = I`` for a shared model."""
    if n < 1 or n0 < 1:
        raise ValueError("n and n0 must be >= 1")
    info = fisher_information(family, theta0, sigma2)
    return 1.0 / (n * info + xi * n0 * info)


def _simulate(family, theta0, n, n0, rng, sigma2):
    if family == "gaussian":
        s = np.sqrt(sigma2)
        return rng.normal(theta0, s, n), rng.normal(theta0, s, n0)
    return (rng.random(n) < theta0).astype(float), (rng.random(n0) < theta0).astype(float)


def _posterior(family, x, y, cfg, sigma2, prior, n_points=4001, width=12.0):
    """Generalized posterior on a grid around the current-data estimate."""
    n = x.size
    if family == "gaussian":
        mu0, tau02 = prior if prior is not None else (0.0, 10.0)
        m = GaussianBorrowModel.from_data(x, y, sigma2, mu0, tau02)
        se = np.sqrt(sigma2 / n)
        xs = np.linspace(x.mean() - width * se, x.mean() + width * se, n_points)
        lp0, lp1 = gaussian_log_p0(m, xs), gaussian_log_p1(m, xs)
    else:
        a0, b0 = prior if prior is not None else (1.0, 1.0)
        m = BetaBernoulliBorrowModel(a0, b0, n, int(x.sum()), y.size, int(y.sum()))
        p = min(max(x.mean(), 1.0 / n), 1.0 - 1.0 / n)
        se = np.sqrt(p * (1 - p) / n)
        xs = np.linspace(max(p - width * se, 1e-9), min(p + width * se, 1 - 1e-9), n_points)
        lp0, lp1 = beta_bernoulli_log_p0(m, xs), beta_bernoulli_log_p1(m, xs)
    return normalize(GridDensity(xs, power_mean_log(lp0, lp1, cfg.xi, cfg.z)))


def outside_mass(g, theta0, epsilon):
    """Posterior mass of ``|theta - theta0| > epsilon`` on the grid."""
    cdf = g.cdf()
    a = np.clip(theta0 - epsilon, g.xs[0], g.xs[-1])
    b = np.clip(theta0 + epsilon, g.xs[0], g.xs[-1])
    # both tails taken from the cdf so a ball covering the grid gives exactly 0
    tails = np.interp(a, g.xs, cdf) + (cdf[-1] - np.interp(b, g.xs, cdf))
    return float(np.clip(tails / cdf[-1], 0.0, 1.0))


def consistency_sweep(family, theta0, cfg, epsilon, sizes, replicates, seed, sigma2=1.0, prior=None):
    """Average posterior mass outside the epsilon-ball as ``n = n0`` grows.

    Each (size, replicate) cell draws from its own child of
    ``SeedSequence(seed)``.
    """
    _check_family(family)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    sizes = np.asarray(sizes, dtype=int)
    if np.any(np.diff(sizes) <= 0):
        raise ValueError("sizes must be increasing")
    children = np.random.SeedSequence(seed).spawn(sizes.size * replicates)
    masses = np.empty((sizes.size, replicates))
    for i, n in enumerate(sizes):
        for r in range(replicates):
            rng = np.random.default_rng(children[i * replicates + r])
            x, y = _simulate(family, theta0, int(n), int(n), rng, sigma2)
            masses[i, r] = outside_mass(_posterior(family, x, y, cfg, sigma2, prior), theta0, epsilon)
    sd = masses.std(axis=1, ddof=1) if replicates > 1 else np.zeros(sizes.size)
    return ConsistencySweepResult(sizes, masses.mean(axis=1), sd, float(epsilon), int(replicates))


def posterior_variances(family, theta0, n, n0, cfg, replicates, seed, sigma2=1.0, prior=None):
    """Grid variance of the generalized posterior over seeded replicates."""
    _check_family(family)
    out = np.empty(replicates)
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(replicates)):
        x, y = _simulate(family, theta0, n, n0, np.random.default_rng(child), sigma2)
        out[r] = _posterior(family, x, y, cfg, sigma2, prior).variance()
    return out


def variance_ratio(family, theta0, n, n0, cfg, replicates, seed, sigma2=1.0, prior=None):
    """Mean empirical posterior variance divided by the leading term."""
    v = posterior_variances(family, theta0, n, n0, cfg, replicates, seed, sigma2, prior)
    return float(v.mean() / leading_variance(family, theta0, n, n0, cfg.xi, sigma2))
