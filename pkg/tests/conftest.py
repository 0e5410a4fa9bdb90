import numpy as np
import pytest
from hypothesis import settings

from histborrow import GridDensity, normalize

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def gauss_grid(mu=0.0, sd=1.0, lo=-8.0, hi=8.0, n=2001, normalized=True):
    xs = np.linspace(lo, hi, n)
    lv = -0.5 * ((xs - mu) / sd) ** 2 - np.log(sd * np.sqrt(2 * np.pi))
    g = GridDensity(xs, lv)
    return normalize(g) if normalized else g


@pytest.fixture
def std_normal():
    return gauss_grid()


def gaussian_problem(rng, n_points=2001):
    """Random (log L, log L0, log pi0) grids for a normal-mean model."""
    n, n0 = rng.integers(5, 40, 2)
    theta, shift = rng.normal(0, 1), rng.normal(0, 1)
    x = rng.normal(theta, 1, n)
    y = rng.normal(theta + shift, 1, n0)
    xs = np.linspace(-6 + theta, 6 + theta, n_points)
    log_L = -0.5 * ((x[None, :] - xs[:, None]) ** 2).sum(axis=1) - 0.5 * n * np.log(2 * np.pi)
    log_L0 = -0.5 * ((y[None, :] - xs[:, None]) ** 2).sum(axis=1) - 0.5 * n0 * np.log(2 * np.pi)
    log_pi0 = -0.5 * xs**2 / 10 - 0.5 * np.log(2 * np.pi * 10)
    return GridDensity(xs, log_L), GridDensity(xs, log_L0), GridDensity(xs, log_pi0)


def pseudo_posteriors(log_L, log_L0, log_pi0):
    xs = log_L.xs
    p0 = GridDensity(xs, log_L.log_vals + log_pi0.log_vals)
    p1 = GridDensity(xs, log_L.log_vals + log_L0.log_vals + log_pi0.log_vals)
    return p0, p1


def perturbations(g, eps=0.05, count=20):
    """``g exp(eps sin(k theta))``, renormalized, for k = 1..count."""
    return [normalize(GridDensity(g.xs, g.log_vals + eps * np.sin(k * g.xs))) for k in range(1, count + 1)]


def random_cfg(rng):
    from histborrow import BorrowConfig

    return BorrowConfig(float(rng.uniform(0.05, 0.95)), float(rng.uniform(-0.9, 4.0)))


def random_gaussian_model(rng):
    from histborrow.models import GaussianBorrowModel

    n, n0 = (int(v) for v in rng.integers(1, 30, 2))
    x = rng.normal(rng.normal(0, 1), 1.0, n)
    y = rng.normal(rng.normal(0, 1.5), 1.0, n0)
    return GaussianBorrowModel.from_data(x, y, float(rng.uniform(0.5, 2)), float(rng.normal()),
                                         float(rng.uniform(0.5, 5)))


def random_beta_model(rng):
    from histborrow.models import BetaBernoulliBorrowModel

    n, n0 = (int(v) for v in rng.integers(1, 40, 2))
    return BetaBernoulliBorrowModel(float(rng.uniform(1, 5)), float(rng.uniform(1, 5)), n,
                                    int(rng.integers(0, n + 1)), n0, int(rng.integers(0, n0 + 1)))


def random_dirichlet_model(rng):
    from histborrow.models import DirichletMultinomialBorrowModel

    return DirichletMultinomialBorrowModel(tuple(rng.uniform(1, 4, 3)), tuple(rng.integers(0, 15, 3)),
                                           tuple(rng.integers(0, 15, 3)))
