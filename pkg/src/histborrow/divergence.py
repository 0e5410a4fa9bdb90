"""Grid densities and the divergence functionals used throughout the package.

A density is stored as log-values on a strictly increasing 1-D grid.  All
integrals are trapezoid rules on that grid, so every divergence here is the
exact divergence between the piecewise-linear interpolants' node values
under the trapezoid measure.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import AllMassZero, AlphaSingular, GridMismatch, NonFiniteGrid, SupportViolation

# log-density values below this are treated as exact zeros in ratios
LOG_ZERO = -745.0


def trapezoid_weights(xs):
    """Per-node trapezoid weights so that ``sum(w * f) == trapezoid(f, xs)``."""
    xs = np.asarray(xs, dtype=float)
    h = np.diff(xs)
    w = np.zeros_like(xs)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def log_trapezoid(xs, log_vals):
    """Log of the trapezoid integral of ``exp(log_vals)``, computed panel-wise."""
    xs = np.asarray(xs, dtype=float)
    log_vals = np.asarray(log_vals, dtype=float)
    h = np.diff(xs)
    panel = np.log(0.5 * h) + np.logaddexp(log_vals[:-1], log_vals[1:])
    return float(logsumexp(panel))


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A 1-D density as log-values on a strictly increasing grid.

    Parameters
    ----------
    xs : array_like
        Support grid, strictly increasing and finite, at least 3 points.
    log_vals : array_like
        Log-density at each grid node; ``-inf`` marks exact zeros.
    normalized : bool
        Whether the trapezoid integral of ``exp(log_vals)`` is one.
    """

    xs: np.ndarray
    log_vals: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        lv = np.array(self.log_vals, dtype=float)
        if xs.ndim != 1 or lv.shape != xs.shape:
            raise ValueError("xs and log_vals must be 1-D arrays of equal length")
        if xs.size < 3:
            raise ValueError("a grid density needs at least 3 points")
        if not np.all(np.isfinite(xs)):
            raise NonFiniteGrid("grid contains non-finite abscissae")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("xs must be strictly increasing")
        if np.any(np.isnan(lv)) or np.any(lv == np.inf):
            raise ValueError("log_vals must be finite or -inf")
        xs.setflags(write=False)
        lv.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "log_vals", lv)
        if self.normalized:
            mass = self.mass()
            if abs(mass - 1.0) > 1e-6:
                raise ValueError(f"density flagged normalized but integrates to {mass!r}")

    @classmethod
    def from_function(cls, xs, log_fn, normalized=False):
        xs = np.asarray(xs, dtype=float)
        return cls(xs, log_fn(xs), normalized=normalized)

    @property
    def pdf(self):
        return np.exp(self.log_vals)

    def mass(self):
        if np.all(self.log_vals == -np.inf):
            return 0.0
        return float(np.exp(log_trapezoid(self.xs, self.log_vals)))

    def mean(self):
        return float(np.trapezoid(self.xs * self.pdf, self.xs) / np.trapezoid(self.pdf, self.xs))

    def variance(self):
        p = self.pdf
        z = np.trapezoid(p, self.xs)
        m = np.trapezoid(self.xs * p, self.xs) / z
        return float(np.trapezoid((self.xs - m) ** 2 * p, self.xs) / z)

    def cdf(self):
        """Cumulative trapezoid integral at each node (starts at 0)."""
        p = self.pdf
        c = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(self.xs) * (p[:-1] + p[1:]))])
        return c

    # serialization

    def to_csv(self):
        buf = io.StringIO()
        buf.write("x,log_density\n")
        for x, v in zip(self.xs, self.log_vals):
            buf.write(f"{float(x)!r},{_fmt(v)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, normalized=False):
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines[0].strip() != "x,log_density":
            raise ValueError("expected header 'x,log_density'")
        rows = [ln.split(",") for ln in lines[1:]]
        xs = [float(r[0]) for r in rows]
        lv = [float(r[1]) for r in rows]
        return cls(np.array(xs), np.array(lv), normalized=normalized)

    def to_json(self):
        return json.dumps(
            {
                "xs": [float(x) for x in self.xs],
                "log_vals": [None if v == -np.inf else float(v) for v in self.log_vals],
                "normalized": bool(self.normalized),
            }
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        lv = [-np.inf if v is None else v for v in d["log_vals"]]
        return cls(np.array(d["xs"], dtype=float), np.array(lv, dtype=float), bool(d["normalized"]))


def _fmt(v):
    v = float(v)
    return "-inf" if v == -np.inf else repr(v)


def _check_same_grid(p, q):
    if p.xs.shape != q.xs.shape or not np.array_equal(p.xs, q.xs):
        raise GridMismatch("densities are defined on different grids")


def normalize(raw):
    """Rescale a grid density so that its trapezoid integral is one.

    The log-values are shifted by a single constant, the log of the
    trapezoid integral, accumulated as a log-sum-exp over panel masses.
    """
    if not np.all(np.isfinite(raw.xs)):
        raise NonFiniteGrid("grid contains non-finite abscissae")
    if np.all(raw.log_vals == -np.inf):
        raise AllMassZero("every log-density value is -inf")
    log_z = log_trapezoid(raw.xs, raw.log_vals)
    return GridDensity(raw.xs, raw.log_vals - log_z, normalized=True)


def _zeroed(log_vals):
    lv = np.array(log_vals, dtype=float)
    lv[lv < LOG_ZERO] = -np.inf
    return lv


def alpha_divergence(p, q, alpha):
    r"""Amari alpha-divergence by trapezoid quadrature.

    .. math::

        D_\alpha[p\|q] = \frac{4}{1-\alpha^2}
            \Bigl(1 - \int p^{(1-\alpha)/2} q^{(1+\alpha)/2}\Bigr)

    ``alpha`` within 1e-12 of +-1 is rejected; use :func:`kl_divergence`
    for those limits.  Returns ``inf`` when the integral diverges (a zero of
    one density met by a negative exponent).
    """
    _check_same_grid(p, q)
    alpha = float(alpha)
    if abs(abs(alpha) - 1.0) < 1e-12:
        raise AlphaSingular(f"alpha={alpha!r} is a KL limit; call kl_divergence instead")
    a = 0.5 * (1.0 - alpha)
    b = 0.5 * (1.0 + alpha)
    lp = _zeroed(p.log_vals)
    lq = _zeroed(q.log_vals)
    p_zero = lp == -np.inf
    q_zero = lq == -np.inf
    # 0**negative with a positive partner diverges
    if (a < 0 and np.any(p_zero & ~q_zero)) or (b < 0 and np.any(q_zero & ~p_zero)):
        return float("inf")
    both = ~(p_zero | q_zero)
    terms = np.full(lp.shape, -np.inf)
    terms[both] = a * lp[both] + b * lq[both]
    integral = np.exp(log_trapezoid(p.xs, terms)) if np.any(both) else 0.0
    d = 4.0 / (1.0 - alpha * alpha) * (1.0 - integral)
    if -1e-10 <= d < 0:
        d = 0.0
    return float(d)


def kl_divergence(p, q):
    """KL divergence ``int p ln(p/q)`` by trapezoid quadrature."""
    _check_same_grid(p, q)
    lp = _zeroed(p.log_vals)
    lq = _zeroed(q.log_vals)
    pv = np.exp(lp)
    bad = (lq == -np.inf) & (pv > 1e-300)
    if np.any(bad):
        raise SupportViolation("p has mass where q vanishes")
    integrand = np.zeros_like(pv)
    live = pv > 0
    integrand[live] = pv[live] * (lp[live] - lq[live])
    d = float(np.trapezoid(integrand, p.xs))
    if -1e-10 <= d < 0:
        d = 0.0
    return d


def tv_distance(p, q):
    """Total variation distance, half the trapezoid integral of ``|p - q|``."""
    _check_same_grid(p, q)
    d = 0.5 * float(np.trapezoid(np.abs(np.exp(p.log_vals) - np.exp(q.log_vals)), p.xs))
    return min(max(d, 0.0), 1.0)
