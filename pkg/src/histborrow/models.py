"""Closed-form generalized power posteriors for three conjugate settings.

Each model stores only sufficient statistics.  ``*_log_p0`` / ``*_log_p1``
return the full no-borrowing and full-borrowing log pseudo-posteriors with
every constant kept, so they can be fed to the generic grid engine in
:mod:`histborrow.posterior`.  The ``*_generalized_logdensity`` functions are
the closed forms, valid up to a theta-free additive constant.

Bernoulli and categorical likelihoods are sequence likelihoods (no binomial
or multinomial coefficient); any such coefficient would change the relative
weight of p0 and p1 and therefore the answer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln, logsumexp, xlogy

from .divergence import GridDensity, normalize
from .errors import DomainError, GeometricLimitUnsupported, SimplexViolation, UnsupportedDimension
from .posterior import BorrowConfig, power_mean_log

LOG_2PI = np.log(2.0 * np.pi)


def _require_nongeometric(cfg):
    if cfg.geometric_limit and 0.0 < cfg.xi < 1.0:
        raise GeometricLimitUnsupported("closed forms need z != 0 when 0 < xi < 1")


# ---------------------------------------------------------------- Gaussian


@dataclass(frozen=True)
class GaussianBorrowModel:
    """Normal mean with known variance and a normal prior.

    Data enter through ``n, S_X, sumX2`` (current) and ``n0, S_Y, sumY2``
    (historical).
    """

    sigma2: float
    mu0: float
    tau02: float
    n: int = 0
    S_X: float = 0.0
    sumX2: float = 0.0
    n0: int = 0
    S_Y: float = 0.0
    sumY2: float = 0.0

    def __post_init__(self):
        if self.sigma2 <= 0 or self.tau02 <= 0:
            raise ValueError("sigma2 and tau02 must be positive")
        if self.n < 0 or self.n0 < 0:
            raise ValueError("sample sizes must be non-negative")

    @classmethod
    def from_data(cls, x, y, sigma2, mu0, tau02):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return cls(sigma2, mu0, tau02, x.size, float(x.sum()), float(x @ x),
                   y.size, float(y.sum()), float(y @ y))


def _gauss_loglik(theta, n, s, ss, sigma2):
    # sum_i log phi(x_i; theta, sigma2) from sufficient statistics
    return -0.5 * n * np.log(2 * np.pi * sigma2) - (ss - 2 * theta * s + n * theta**2) / (2 * sigma2)


def _gauss_logprior(theta, mu0, tau02):
    return -0.5 * np.log(2 * np.pi * tau02) - (theta - mu0) ** 2 / (2 * tau02)


def gaussian_log_p0(model, theta):
    theta = np.asarray(theta, dtype=float)
    m = model
    return _gauss_loglik(theta, m.n, m.S_X, m.sumX2, m.sigma2) + _gauss_logprior(theta, m.mu0, m.tau02)


def gaussian_log_p1(model, theta):
    theta = np.asarray(theta, dtype=float)
    m = model
    return gaussian_log_p0(model, theta) + _gauss_loglik(theta, m.n0, m.S_Y, m.sumY2, m.sigma2)


def gaussian_generalized_logdensity(model, cfg, theta):
    """Closed-form log generalized posterior, up to an additive constant.

    The form is the conjugate quadratic from ``p0`` plus
    ``(1/z) log(1 + C exp(z S_Y theta / sigma2 - z n0 theta^2 / (2 sigma2)))``,
    with ``log C`` assembled in log space so large samples do not overflow.
    """
    _require_nongeometric(cfg)
    m = model
    theta = np.asarray(theta, dtype=float)
    prec = m.n / m.sigma2 + 1.0 / m.tau02
    lin = m.S_X / m.sigma2 + m.mu0 / m.tau02
    base = -0.5 * prec * theta**2 + lin * theta
    if cfg.xi == 0.0:
        return base
    hist = m.S_Y * theta / m.sigma2 - m.n0 * theta**2 / (2 * m.sigma2)
    if cfg.xi == 1.0:
        return base + hist
    z = cfg.z
    log_c = (np.log(cfg.xi) - np.log1p(-cfg.xi) - 0.5 * m.n0 * z * np.log(2 * np.pi * m.sigma2)
             - z * m.sumY2 / (2 * m.sigma2))
    return base + np.logaddexp(0.0, log_c + z * hist) / z


# ---------------------------------------------------------- Beta-Bernoulli


@dataclass(frozen=True)
class BetaBernoulliBorrowModel:
    """Bernoulli success probability with a Beta prior."""

    alpha0: float
    beta0: float
    n: int = 0
    S_X: int = 0
    n0: int = 0
    S_Y: int = 0

    def __post_init__(self):
        if self.alpha0 <= 0 or self.beta0 <= 0:
            raise ValueError("alpha0 and beta0 must be positive")
        if not (0 <= self.S_X <= self.n and 0 <= self.S_Y <= self.n0):
            raise ValueError("success counts must lie in [0, n]")


def _check_unit(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0) | (theta >= 1)):
        raise DomainError("theta must lie strictly inside (0, 1)")
    return theta


def beta_bernoulli_log_p0(model, theta):
    m = model
    theta = _check_unit(theta)
    return (xlogy(m.S_X + m.alpha0 - 1, theta) + xlogy(m.n - m.S_X + m.beta0 - 1, 1 - theta)
            - betaln(m.alpha0, m.beta0))


def beta_bernoulli_log_p1(model, theta):
    m = model
    theta = _check_unit(theta)
    return beta_bernoulli_log_p0(m, theta) + xlogy(m.S_Y, theta) + xlogy(m.n0 - m.S_Y, 1 - theta)


def beta_bernoulli_generalized_logdensity(model, cfg, theta):
    """``(1/z) ln F(theta)`` for the Beta-Bernoulli model, in log space."""
    _require_nongeometric(cfg)
    m = model
    theta = _check_unit(theta)
    base = xlogy(m.S_X + m.alpha0 - 1, theta) + xlogy(m.n - m.S_X + m.beta0 - 1, 1 - theta)
    hist = xlogy(m.S_Y, theta) + xlogy(m.n0 - m.S_Y, 1 - theta)
    if cfg.xi == 0.0:
        return base
    if cfg.xi == 1.0:
        return base + hist
    z = cfg.z
    log_f = z * base + np.logaddexp(np.log1p(-cfg.xi), np.log(cfg.xi) + z * hist)
    return log_f / z


def beta_grid(n_points=4001, eps=1e-9):
    return np.linspace(eps, 1 - eps, n_points)


# ------------------------------------------------------ Dirichlet-categorical


@dataclass(frozen=True)
class DirichletMultinomialBorrowModel:
    """Categorical probabilities with a Dirichlet prior; X, Y are counts."""

    alpha0: tuple
    X: tuple
    Y: tuple

    def __post_init__(self):
        a, x, y = (np.asarray(v, dtype=float) for v in (self.alpha0, self.X, self.Y))
        if not (a.shape == x.shape == y.shape) or a.ndim != 1 or a.size < 2:
            raise ValueError("alpha0, X, Y must be equal-length vectors with k >= 2")
        if np.any(a <= 0) or np.any(x < 0) or np.any(y < 0):
            raise ValueError("alpha0 must be positive and counts non-negative")
        object.__setattr__(self, "alpha0", tuple(a))
        object.__setattr__(self, "X", tuple(x))
        object.__setattr__(self, "Y", tuple(y))


def _check_simplex(theta, k):
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[-1] != k:
        raise SimplexViolation(f"expected {k} coordinates, got {theta.shape[-1]}")
    if np.any(theta <= 0) or np.any(np.abs(theta.sum(axis=-1) - 1) > 1e-12):
        raise SimplexViolation("points must be strictly positive and sum to 1")
    return theta


def _log_dirichlet_norm(a):
    return gammaln(a.sum()) - gammaln(a).sum()


def dirichlet_log_p0(model, theta):
    a = np.asarray(model.alpha0)
    x = np.asarray(model.X)
    th = _check_simplex(theta, a.size)
    out = np.log(th) @ (x + a - 1) + _log_dirichlet_norm(a)
    return out if np.ndim(theta) > 1 else float(out[0])


def dirichlet_log_p1(model, theta):
    a = np.asarray(model.alpha0)
    y = np.asarray(model.Y)
    th = _check_simplex(theta, a.size)
    out = dirichlet_log_p0(model, th) + np.log(th) @ y
    return out if np.ndim(theta) > 1 else float(out[0])


def dirichlet_multinomial_generalized_logdensity(model, cfg, theta):
    """Closed-form log generalized posterior on the simplex, up to a constant."""
    _require_nongeometric(cfg)
    a = np.asarray(model.alpha0)
    x = np.asarray(model.X)
    y = np.asarray(model.Y)
    th = _check_simplex(theta, a.size)
    lt = np.log(th)
    e0 = lt @ (x + a - 1)
    e1 = lt @ (x + y + a - 1)
    out = power_mean_log(e0, e1, cfg.xi, cfg.z)
    out = np.atleast_1d(out)
    return out if np.ndim(theta) > 1 else float(out[0])


def simplex_grid(k=3, resolution=100):
    """Quadrature nodes and weights on the 2-simplex.

    The simplex is cut into ``resolution**2`` congruent triangles and each
    contributes its centroid with equal weight.  Weights sum to 1/2, the
    area of the simplex in the ``(theta1, theta2)`` chart, so they integrate
    densities given with respect to that Lebesgue measure (e.g. Dirichlet).

    Returns
    -------
    points : ndarray, shape (resolution**2, 3)
    weights : ndarray, shape (resolution**2,)
    """
    if k != 3:
        raise UnsupportedDimension("only ternary simplex grids are supported")
    r = int(resolution)
    if r < 2:
        raise ValueError("resolution must be at least 2")
    pts = []
    for i in range(r):
        for j in range(r - i):
            # upward triangle with corners (i,j), (i+1,j), (i,j+1)
            pts.append(((3 * i + 1) / (3 * r), (3 * j + 1) / (3 * r)))
            if j < r - i - 1:
                # downward triangle (i+1,j), (i,j+1), (i+1,j+1)
                pts.append(((3 * i + 2) / (3 * r), (3 * j + 2) / (3 * r)))
    pts = np.array(pts)
    points = np.column_stack([pts, 1.0 - pts.sum(axis=1)])
    weights = np.full(points.shape[0], 0.5 / r**2)
    return points, weights


@dataclass(frozen=True)
class SimplexDensity:
    """Normalized density values on a simplex quadrature grid."""

    points: np.ndarray
    weights: np.ndarray
    log_vals: np.ndarray

    @property
    def pdf(self):
        return np.exp(self.log_vals)

    def mean(self):
        return (self.weights * self.pdf) @ self.points


def normalize_simplex(points, weights, log_vals):
    log_vals = np.asarray(log_vals, dtype=float)
    log_z = logsumexp(log_vals + np.log(weights))
    return SimplexDensity(points, weights, log_vals - log_z)


def simplex_tv(p, q):
    return float(min(1.0, 0.5 * np.sum(p.weights * np.abs(p.pdf - q.pdf))))


def dirichlet_posterior_simplex(model, cfg, resolution=200, closed_form=True):
    """Normalized generalized posterior on a ternary simplex grid."""
    points, weights = simplex_grid(3, resolution)
    if closed_form:
        lv = dirichlet_multinomial_generalized_logdensity(model, cfg, points)
    else:
        lv = power_mean_log(dirichlet_log_p0(model, points), dirichlet_log_p1(model, points), cfg.xi, cfg.z)
    return normalize_simplex(points, weights, lv)


# ------------------------------------------------------------ grid helpers


def gaussian_posterior_grid(model, cfg, xs=None, closed_form=True):
    """Normalized Gaussian-model generalized posterior on a grid."""
    if xs is None:
        xs = default_gaussian_grid(model)
    xs = np.asarray(xs, dtype=float)
    if closed_form:
        lv = gaussian_generalized_logdensity(model, cfg, xs)
    else:
        lv = power_mean_log(gaussian_log_p0(model, xs), gaussian_log_p1(model, xs), cfg.xi, cfg.z)
    return normalize(GridDensity(xs, lv))


def default_gaussian_grid(model, n_points=4001, width=10.0):
    """Grid covering both the no-borrowing and full-borrowing posteriors."""
    m = model
    centers, sds = [], []
    for nn, s in ((m.n, m.S_X), (m.n + m.n0, m.S_X + m.S_Y)):
        prec = nn / m.sigma2 + 1 / m.tau02
        centers.append((s / m.sigma2 + m.mu0 / m.tau02) / prec)
        sds.append(prec**-0.5)
    sd = max(sds)
    return np.linspace(min(centers) - width * sd, max(centers) + width * sd, n_points)


def beta_posterior_grid(model, cfg, xs=None, closed_form=True):
    """Normalized Beta-Bernoulli generalized posterior on a grid in (0, 1)."""
    xs = beta_grid() if xs is None else np.asarray(xs, dtype=float)
    if closed_form:
        lv = beta_bernoulli_generalized_logdensity(model, cfg, xs)
    else:
        lv = power_mean_log(beta_bernoulli_log_p0(model, xs), beta_bernoulli_log_p1(model, xs), cfg.xi, cfg.z)
    return normalize(GridDensity(xs, lv))


def illustrative_models(n=10, n0=10):
    """The three illustrative configurations, with ``n = n0 = 10`` by default.

    Gaussian: current mean 1, historical mean 2, sigma2 = 1, prior N(1, 1);
    the sums of squares assume zero within-sample spread.  Beta-Bernoulli:
    success rates 0.6 and 0.7 with a Beta(2, 8) prior.  Dirichlet: counts
    (20, 15, 15), historical counts equal to the current ones, prior
    Dirichlet(2, 2, 2).
    """
    g = GaussianBorrowModel(1.0, 1.0, 1.0, n, 1.0 * n, 1.0 * n, n0, 2.0 * n0, 4.0 * n0)
    b = BetaBernoulliBorrowModel(2.0, 8.0, n, round(0.6 * n), n0, round(0.7 * n0))
    d = DirichletMultinomialBorrowModel((2.0, 2.0, 2.0), (20, 15, 15), (20, 15, 15))
    return g, b, d


__all__ = [
    "BorrowConfig",
    "GaussianBorrowModel",
    "BetaBernoulliBorrowModel",
    "DirichletMultinomialBorrowModel",
    "SimplexDensity",
    "gaussian_log_p0",
    "gaussian_log_p1",
    "gaussian_generalized_logdensity",
    "beta_bernoulli_log_p0",
    "beta_bernoulli_log_p1",
    "beta_bernoulli_generalized_logdensity",
    "dirichlet_log_p0",
    "dirichlet_log_p1",
    "dirichlet_multinomial_generalized_logdensity",
    "simplex_grid",
    "simplex_tv",
    "normalize_simplex",
    "dirichlet_posterior_simplex",
    "gaussian_posterior_grid",
    "beta_posterior_grid",
    "default_gaussian_grid",
    "illustrative_models",
]
