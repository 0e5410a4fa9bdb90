"""Robustness of the generalized power posterior under Huber contamination.

Data are drawn from ``(1 - eps) N(theta0, s2) + eps N(thetaH, s2)`` in either
the current or the historical sample.  The contaminated posterior uses the
mixture likelihood, the reference posterior the clean Gaussian likelihood on
the same draws.  Their log-density ratio is, up to a constant,

    d(theta) = M(p0, p1)(theta) - M(p0F, p1F)(theta),

where ``M`` is the log power mean.  With ``R = exp(z d)`` the total variation
distance is at most ``(1/2)[(Rmax / Rmin)^(1/z) - 1] = (1/2) expm1(max d - min d)``.

The sup and inf are taken over the same bounded grid that carries the two
posteriors, so the bound is exact for the grid posteriors.  On the whole
real line the mixture likelihood ratio is unbounded (its log is convex in
theta), so a data-adaptive domain is used by default.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .divergence import GridDensity, normalize, tv_distance
from .errors import SearchDomainTooNarrow
from .posterior import BorrowConfig, power_mean_log

DEFAULT_PRIOR = (0.0, 100.0)


class Direction(str, Enum):
    CurrentContaminated = "current"
    HistoricalContaminated = "historical"


@dataclass(frozen=True)
class ContaminationScenario:
    theta0: float
    thetaH: float
    sigma2: float = 1.0
    epsH: float = 0.05
    n: int = 50
    n0: int = 50
    direction: Direction = Direction.CurrentContaminated

    def __post_init__(self):
        if not 0.0 <= self.epsH <= 0.5:
            raise ValueError("epsH must lie in [0, 1/2]")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.thetaH == self.theta0 and self.epsH != 0:
            raise ValueError("thetaH must differ from theta0 unless epsH = 0")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def delta_H(self):
        return abs(self.thetaH - self.theta0)

    @property
    def sigma(self):
        return float(np.sqrt(self.sigma2))

    def replace(self, **kw):
        d = dict(theta0=self.theta0, thetaH=self.thetaH, sigma2=self.sigma2, epsH=self.epsH,
                 n=self.n, n0=self.n0, direction=self.direction)
        d.update(kw)
        return ContaminationScenario(**d)


@dataclass(frozen=True)
class SensitivityBounds:
    """Envelopes ``mL <= L / L~ <= ML`` and ``mpi <= pi0 / pi0~ <= Mpi``."""

    mL: float
    ML: float
    mpi: float
    Mpi: float

    def __post_init__(self):
        if not (0 < self.mL <= 1 <= self.ML and 0 < self.mpi <= 1 <= self.Mpi):
            raise ValueError("need 0 < mL <= 1 <= ML and 0 < mpi <= 1 <= Mpi")


def _gauss_logpdf(x, mean, sigma2):
    return -0.5 * np.log(2 * np.pi * sigma2) - (x - mean) ** 2 / (2 * sigma2)


def contaminated_log_likelihood(data, theta, scenario, eps=None):
    """Huber-mixture log-likelihood, vectorized over ``theta``.

    Each point contributes ``log[(1-eps) phi(x; theta) + eps phi(x; thetaH)]``;
    ``eps = 0`` (or ``thetaH == theta0``) reduces to the Gaussian likelihood.
    """
    eps = scenario.epsH if eps is None else eps
    data = np.asarray(data, dtype=float)
    theta = np.asarray(theta, dtype=float)
    clean = _gauss_logpdf(data[None, :], theta.reshape(-1, 1), scenario.sigma2)
    if eps == 0.0 or scenario.thetaH == scenario.theta0:
        out = clean.sum(axis=1)
    else:
        outl = _gauss_logpdf(data, scenario.thetaH, scenario.sigma2)
        out = np.logaddexp(np.log1p(-eps) + clean, np.log(eps) + outl[None, :]).sum(axis=1)
    return out.reshape(theta.shape) if theta.ndim else float(out[0])


def _gauss_prior(theta, prior):
    mu0, tau02 = prior
    return _gauss_logpdf(np.asarray(theta, dtype=float), mu0, tau02)


def _log_components(theta, current, hist, scenario, prior):
    """Current and historical log-likelihoods under the contaminated and clean models."""
    theta = np.asarray(theta, dtype=float)
    if scenario.direction == Direction.CurrentContaminated:
        lc = contaminated_log_likelihood(current, theta, scenario)
        lcF = contaminated_log_likelihood(current, theta, scenario, eps=0.0)
        lh = contaminated_log_likelihood(hist, theta, scenario, eps=0.0)
        lhF = lh
    else:
        lc = contaminated_log_likelihood(current, theta, scenario, eps=0.0)
        lcF = lc
        lh = contaminated_log_likelihood(hist, theta, scenario)
        lhF = contaminated_log_likelihood(hist, theta, scenario, eps=0.0)
    return lc, lcF, lh, lhF, _gauss_prior(theta, prior)


def reference_log_densities(theta, current, hist, scenario, prior=DEFAULT_PRIOR):
    """Return ``(lp0, lp1, lp0F, lp1F)`` at ``theta``.

    The contaminated sample enters ``lp0, lp1`` through the mixture
    likelihood and ``lp0F, lp1F`` through the clean likelihood.
    """
    lc, lcF, lh, lhF, lpi = _log_components(theta, current, hist, scenario, prior)
    return lc + lpi, lc + lh + lpi, lcF + lpi, lcF + lhF + lpi


def _log_shift(theta, current, hist, scenario, cfg, prior):
    # d(theta) = log g_H - log g_F up to a constant; log R = z * d.  The power
    # mean commutes with a common shift, so M(lc + pi, lc + lh + pi) =
    # lc + pi + M(0, lh); this avoids cancelling the large current term and
    # leaves d exactly alpha-free when only the current sample is contaminated.
    lc, lcF, lh, lhF, _ = _log_components(theta, current, hist, scenario, prior)
    d = lc - lcF
    if lh is lhF:
        return d
    zero = np.zeros_like(lh)
    return d + (power_mean_log(zero, lh, cfg.xi, cfg.z) - power_mean_log(zero, lhF, cfg.xi, cfg.z))


def log_ratio_R(theta, current, hist, scenario, cfg, prior=DEFAULT_PRIOR):
    """``log R(theta)``, computed as a difference of paired log-sum-exps."""
    lp0, lp1, lp0F, lp1F = reference_log_densities(theta, current, hist, scenario, prior)
    xi, z = cfg.xi, cfg.z
    if xi == 0.0:
        return z * (lp0 - lp0F)
    if xi == 1.0:
        return z * (lp1 - lp1F)
    a = np.logaddexp(np.log1p(-xi) + z * lp0, np.log(xi) + z * lp1)
    b = np.logaddexp(np.log1p(-xi) + z * lp0F, np.log(xi) + z * lp1F)
    return a - b


def ratio_R(theta, current, hist, scenario, cfg, prior=DEFAULT_PRIOR):
    """``R(theta) = [(1-xi) p0^z + xi p1^z] / [(1-xi) p0F^z + xi p1F^z]``."""
    return np.exp(log_ratio_R(theta, current, hist, scenario, cfg, prior))


def default_domain(current, hist, scenario, prior=DEFAULT_PRIOR, log_floor=-40.0, grid_n=4001):
    """Common grid for the bound and both posteriors.

    Starting from ``[min(theta0, thetaH) - 6 sigma, max(theta0, thetaH) + 6 sigma]``
    the range is trimmed to where at least one of the four alpha-free
    reference densities (each scaled to its own peak) exceeds
    ``exp(log_floor)``, then widened to keep theta0 and thetaH inside.
    Keeping thetaH inside gives ``Rmin <= 1 <= Rmax`` in the contaminated
    direction.  The domain does not depend on (xi, alpha), so bounds along
    an alpha scan share one grid.
    """
    s = 6.0 * scenario.sigma
    a, b = sorted((scenario.theta0, scenario.thetaH))
    wide = np.linspace(a - s, b + s, 20001)
    keep = np.zeros(wide.shape, dtype=bool)
    for lv in reference_log_densities(wide, current, hist, scenario, prior):
        keep |= lv - lv.max() > log_floor
    idx = np.flatnonzero(keep)
    lo = min(wide[max(idx[0] - 1, 0)], a)
    hi = max(wide[min(idx[-1] + 1, wide.size - 1)], b)
    return float(lo), float(hi), int(grid_n)


def _grid(current, hist, scenario, prior, search):
    lo, hi, n = search if search is not None else default_domain(current, hist, scenario, prior)
    if n < 2001:
        raise ValueError("search grid needs at least 2001 points")
    return np.linspace(lo, hi, n)


def grid_posteriors(current, hist, scenario, cfg, prior=DEFAULT_PRIOR, xs=None):
    """Contaminated and clean generalized posteriors on a shared grid."""
    if xs is None:
        xs = _grid(current, hist, scenario, prior, None)
    lp0, lp1, lp0F, lp1F = reference_log_densities(xs, current, hist, scenario, prior)
    gH = normalize(GridDensity(xs, power_mean_log(lp0, lp1, cfg.xi, cfg.z)))
    gF = normalize(GridDensity(xs, power_mean_log(lp0F, lp1F, cfg.xi, cfg.z)))
    return gH, gF


def _check_edges(g, rel=1e-8):
    lv = g.log_vals
    if max(lv[0], lv[-1]) > lv.max() + np.log(rel):
        raise SearchDomainTooNarrow("posterior mass reaches the edge of the search domain")


def _refine(f, xs, i, sign):
    # local polish between neighbouring cells; boundary extrema stay as scanned
    if i == 0 or i == len(xs) - 1:
        return sign * f(xs[i])
    res = minimize_scalar(lambda t: -sign * f(t), bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                          options={"xatol": 1e-12})
    return max(sign * f(xs[i]), -res.fun)


def shift_extrema(current, hist, scenario, cfg, prior=DEFAULT_PRIOR, search=None):
    """``(max d, min d)`` over the search grid, with interior refinement."""
    xs = _grid(current, hist, scenario, prior, search)
    if search is None:
        for g in grid_posteriors(current, hist, scenario, cfg, prior, xs):
            _check_edges(g)
    d = _log_shift(xs, current, hist, scenario, cfg, prior)

    def f(t):
        return float(_log_shift(np.array([t]), current, hist, scenario, cfg, prior)[0])

    dmax = _refine(f, xs, int(np.argmax(d)), 1.0)
    dmin = -_refine(f, xs, int(np.argmin(d)), -1.0)
    return dmax, dmin


def tv_bound(current, hist, scenario, cfg, prior=DEFAULT_PRIOR, search=None):
    """``(1/2)[(Rmax / Rmin)^(1/z) - 1]`` over the search domain.

    Parameters
    ----------
    search : (lo, hi, grid_n), optional
        Explicit domain.  By default :func:`default_domain` is used and
        ``SearchDomainTooNarrow`` is raised if either posterior is not
        negligible at its edges.
    """
    dmax, dmin = shift_extrema(current, hist, scenario, cfg, prior, search)
    return 0.5 * float(np.expm1(max(dmax - dmin, 0.0)))


def tv_bound_maxform(current, hist, scenario, cfg, prior=DEFAULT_PRIOR, search=None):
    """``(1/2) max{Rmax^(1/z) - 1, 1 - Rmin^(1/z)}``."""
    dmax, dmin = shift_extrema(current, hist, scenario, cfg, prior, search)
    return 0.5 * max(float(np.expm1(dmax)), float(-np.expm1(dmin)), 0.0)


def simulate_data(scenario, rng):
    """Draw ``(current, hist)`` with the contaminated side set by ``direction``."""
    s = scenario.sigma

    def mixture(m):
        x = rng.normal(scenario.theta0, s, size=m)
        flip = rng.random(m) < scenario.epsH
        x[flip] = rng.normal(scenario.thetaH, s, size=int(flip.sum()))
        return x

    def clean(m):
        return rng.normal(scenario.theta0, s, size=m)

    if scenario.direction == Direction.CurrentContaminated:
        return mixture(scenario.n), clean(scenario.n0)
    return clean(scenario.n), mixture(scenario.n0)


def empirical_tv_trials(scenario, cfg, prior=DEFAULT_PRIOR, seed=0, trials=10):
    """Per-trial empirical TV and the matching bound.

    Trial ``k`` uses the ``k``-th child of ``SeedSequence(seed)``, so results
    do not depend on evaluation order.

    Returns
    -------
    tvs, bounds : ndarray of shape (trials,)
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tvs, bounds = np.empty(trials), np.empty(trials)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        current, hist = simulate_data(scenario, np.random.default_rng(child))
        xs = _grid(current, hist, scenario, prior, None)
        gH, gF = grid_posteriors(current, hist, scenario, cfg, prior, xs)
        tvs[k] = tv_distance(gH, gF)
        bounds[k] = tv_bound(current, hist, scenario, cfg, prior)
    return tvs, bounds


def empirical_tv(scenario, cfg, prior=DEFAULT_PRIOR, seed=0, trials=10):
    """Mean and sample sd of the empirical TV over seeded trials."""
    tvs, _ = empirical_tv_trials(scenario, cfg, prior, seed, trials)
    sd = float(np.std(tvs, ddof=1)) if trials > 1 else 0.0
    return float(np.mean(tvs)), sd


def monotonicity_verdict(values, tol=1e-9):
    """Classify a sequence as Increasing, Decreasing or NonMonotone.

    A step counts as non-decreasing when it exceeds ``-tol``.  Increasing is
    tested first, so a flat sequence is Increasing.
    """
    diffs = np.diff(np.asarray(values, dtype=float))
    if np.all(diffs > -tol):
        return "Increasing"
    if np.all(diffs < tol):
        return "Decreasing"
    return "NonMonotone"


def bound_monotonicity_scan(scenario, alphas, xi=0.5, prior=DEFAULT_PRIOR, seed=0, data=None, search=None):
    """Theoretical bound along ``alphas`` on one seeded data set.

    Returns
    -------
    bounds : ndarray
    verdict : str
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 5 or np.any(np.diff(alphas) <= 0):
        raise ValueError("need at least 5 increasing alphas")
    if np.any(alphas <= -1):
        raise ValueError("alphas must exceed -1")
    if data is None:
        data = simulate_data(scenario, np.random.default_rng(seed))
    current, hist = data
    bounds = np.array([tv_bound(current, hist, scenario, BorrowConfig(xi, a), prior, search) for a in alphas])
    return bounds, monotonicity_verdict(bounds)


def prior_sensitivity_K(bounds, xi, alpha, normalizers=(1.0, 1.0, 1.0)):
    """Constant ``K(alpha)`` with ``TV(g, g~) <= K(alpha) TV(pi0, pi0~)``.

    ``K = C1 C2 ML / C * (1 + MF / C~)`` where, with ``z = (1 + alpha)/2``,
    ``C1 = (1-xi) Mp^(z-1) + xi (Mp ML)^(z-1) ML``, ``C2`` is ``MH^(1/z-1)``
    for ``z <= 1`` and ``mH^(1/z-1)`` otherwise, and
    ``MF = Mp ((1-xi) + xi ML^z)^(1/z)``.

    Parameters
    ----------
    normalizers : (C, Ctilde, Mp)
        Posterior normalizing constants and the pseudo-posterior envelope,
        supplied by the caller.
    """
    C, Ct, Mp = (float(v) for v in normalizers)
    if C <= 0 or Ct <= 0 or Mp <= 0:
        raise ValueError("normalizers must be positive")
    b = bounds
    z = 0.5 * (1.0 + float(alpha))
    if z <= 0:
        raise ValueError("alpha must exceed -1")
    mix_hi = (1 - xi) + xi * b.ML**z
    mix_lo = (1 - xi) + xi * b.mL**z
    MH = b.ML**z * b.Mpi**z * mix_hi
    mH = b.mL**z * b.mpi**z * mix_lo
    C2 = MH ** (1 / z - 1) if z <= 1 else mH ** (1 / z - 1)
    C1 = (1 - xi) * Mp ** (z - 1) + xi * (Mp * b.ML) ** (z - 1) * b.ML
    MF = Mp * mix_hi ** (1 / z)
    return float(C1 * C2 * b.ML / C * (1 + MF / Ct))
