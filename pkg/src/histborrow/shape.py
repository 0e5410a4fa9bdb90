"""How alpha moves the generalized power posterior between one and two modes.

With ``L_z = (1/z) log{(1-xi) p0^z + xi p1^z}`` the derivative is

    L_z' = p0'/p0 + w (p1'/p1 - p0'/p0),   w = xi R^z / ((1-xi) + xi R^z),

with ``R = p1 / p0``.  The weight ``w`` is a logistic function of
``z log R``, so large ``z`` makes it switch sharply where ``R`` crosses one
and the two component modes survive; small ``z`` gives a smooth blend and a
single mode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.signal import find_peaks
from scipy.special import expit

from .divergence import GridDensity
from .errors import DegenerateDensity, NonPositiveDensity, NoTransition
from .posterior import BorrowConfig, generalized_posterior_grid, power_mean_log


@dataclass(frozen=True)
class ModeReport:
    mode_locations: tuple
    mode_count: int
    alpha: float = float("nan")
    xi: float = float("nan")
    boundary: tuple = ()


def log_mixture_Lz(log_p0, log_p1, xi, z):
    """``(1/z) log{(1-xi) p0^z + xi p1^z}``; the generalized log posterior."""
    return power_mean_log(log_p0, log_p1, xi, z)


def lz_derivative(p0_val, dp0_val, p1_val, dp1_val, xi, z):
    """Closed-form derivative of :func:`log_mixture_Lz`.

    The mixing weight is evaluated as ``expit(log xi - log(1-xi) + z log R)``
    so large ``|z log R|`` does not overflow.
    """
    p0_val = np.asarray(p0_val, dtype=float)
    p1_val = np.asarray(p1_val, dtype=float)
    if np.any(p0_val <= 0) or np.any(p1_val <= 0):
        raise NonPositiveDensity("densities must be strictly positive")
    s0 = dp0_val / p0_val
    if xi == 0.0:
        return s0
    s1 = dp1_val / p1_val
    if xi == 1.0:
        return s1
    w = expit(np.log(xi) - np.log1p(-xi) + z * (np.log(p1_val) - np.log(p0_val)))
    return s0 + w * (s1 - s0)


def count_modes(g, rel_tol=1e-4, include_boundary=False, alpha=float("nan"), xi=float("nan")):
    """Local maxima of a grid density with a relative log-prominence filter.

    A node counts as a mode when its log-density rises above the higher of
    its two flanking minima by at least ``rel_tol * (max - min)`` of the
    log-values.  Flat tops collapse to their midpoint.  With
    ``include_boundary`` an endpoint maximum is also reported and flagged.
    """
    if not 0 < rel_tol <= 0.1:
        raise ValueError("rel_tol must lie in (0, 0.1]")
    lv = np.array(g.log_vals, dtype=float)
    finite = np.isfinite(lv)
    if not finite.any():
        raise DegenerateDensity("density has no finite values")
    lo, hi = lv[finite].min(), lv[finite].max()
    if hi - lo < 1e-12:
        raise DegenerateDensity("density is flat on the grid")
    lv[~finite] = lo
    prom = rel_tol * (hi - lo)
    if include_boundary:
        pad = lo - 1.0
        peaks, _ = find_peaks(np.concatenate([[pad], lv, [pad]]), prominence=prom)
        peaks = peaks - 1
    else:
        peaks, _ = find_peaks(lv, prominence=prom)
    xs = g.xs[peaks]
    edge = tuple(bool(i == 0 or i == lv.size - 1) for i in peaks)
    return ModeReport(tuple(float(x) for x in xs), int(peaks.size), float(alpha), float(xi), edge)


def modes_at(p0, p1, xi, alpha, rel_tol=1e-4, include_boundary=False):
    g = generalized_posterior_grid(p0, p1, BorrowConfig(xi, alpha))
    return count_modes(g, rel_tol, include_boundary, alpha, xi)


def mode_scan(p0, p1, xi, alphas, rel_tol=1e-4, include_boundary=False):
    return [modes_at(p0, p1, xi, a, rel_tol, include_boundary) for a in alphas]


def alpha_mode_transition(p0, p1, xi, alpha_lo, alpha_hi, tol=1e-3, rel_tol=1e-4, include_boundary=False):
    """Bisect on alpha for the change in mode count.

    Returns the midpoint of the final bracket, whose width is at most ``tol``.
    Raises ``NoTransition`` when both ends have the same count.
    """
    if not alpha_lo < alpha_hi:
        raise ValueError("need alpha_lo < alpha_hi")

    def count(a):
        return modes_at(p0, p1, xi, a, rel_tol, include_boundary).mode_count

    c_lo, c_hi = count(alpha_lo), count(alpha_hi)
    if c_lo == c_hi:
        raise NoTransition(f"mode count is {c_lo} at both ends")
    lo, hi = float(alpha_lo), float(alpha_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def swapping_dominance(p0, p1):
    """Check the single-crossing dominance swap between the two modes.

    The density with the left mode must dominate on the left part of the
    inter-mode interval and be dominated on the right part, with exactly
    one sign change.  Returns ``(ok, crossing)``.
    """
    i0, i1 = int(np.argmax(p0.log_vals)), int(np.argmax(p1.log_vals))
    if i0 == i1:
        return False, None
    left, right = (p0, p1) if i0 < i1 else (p1, p0)
    a, b = sorted((i0, i1))
    diff = left.log_vals[a:b + 1] - right.log_vals[a:b + 1]
    sign = np.sign(diff)
    nz = sign[sign != 0]
    if nz.size == 0 or nz[0] < 0 or nz[-1] > 0:
        return False, None
    if np.count_nonzero(np.diff(nz)) != 1:
        return False, None
    k = int(np.flatnonzero(np.diff(np.sign(diff)) != 0)[0])
    # linear interpolation of the crossing
    x0, x1 = left.xs[a + k], left.xs[a + k + 1]
    d0, d1 = diff[k], diff[k + 1]
    cross = x0 if d0 == d1 else x0 + (x1 - x0) * d0 / (d0 - d1)
    return True, float(cross)


# parametric specs -----------------------------------------------------------


def parse_density_spec(spec):
    """Frozen scipy distribution from ``normal:mu,sigma``, ``beta:a,b`` or ``loggamma:c``.

    ``sigma`` is a standard deviation.
    """
    family, _, args = spec.partition(":")
    vals = [float(v) for v in args.split(",")] if args else []
    family = family.strip().lower()
    if family == "normal" and len(vals) == 2:
        return stats.norm(vals[0], vals[1])
    if family == "beta" and len(vals) == 2:
        return stats.beta(vals[0], vals[1])
    if family == "loggamma" and len(vals) == 1:
        return stats.loggamma(vals[0])
    raise ValueError(f"cannot parse density spec {spec!r}")


def default_support(dists, n_points=4001):
    """Grid covering the bulk of every distribution in ``dists``."""
    if all(d.dist.name == "beta" for d in dists):
        return np.linspace(1e-6, 1 - 1e-6, n_points)
    lo = min(d.ppf(1e-6) for d in dists)
    hi = max(d.ppf(1 - 1e-6) for d in dists)
    return np.linspace(lo, hi, n_points)


def grid_from_dist(dist, xs):
    return GridDensity(xs, dist.logpdf(xs))


def gaussian_pair(n_points=4001, lo=-6.0, hi=6.0):
    """``p0 = N(1, 1)``, ``p1 = N(-1, 0.25)`` (second argument a variance)."""
    xs = np.linspace(lo, hi, n_points)
    return grid_from_dist(stats.norm(1, 1), xs), grid_from_dist(stats.norm(-1, 0.5), xs)


def loggamma_pair(n_points=4001, lo=-10.0, hi=4.0):
    """``p0 = LogGamma(0.5)``, ``p1 = LogGamma(3)`` on ``[lo, hi]``.

    The log-density of LogGamma falls like ``-exp(x)`` on the right, so a
    wide right end inflates the log range used by the prominence filter.
    """
    d0, d1 = stats.loggamma(0.5), stats.loggamma(3.0)
    xs = np.linspace(lo, hi, n_points)
    return grid_from_dist(d0, xs), grid_from_dist(d1, xs)


def beta_pair(n_points=4001):
    d0, d1 = stats.beta(2, 5), stats.beta(5, 1)
    xs = np.linspace(1e-6, 1 - 1e-6, n_points)
    return grid_from_dist(d0, xs), grid_from_dist(d1, xs)
