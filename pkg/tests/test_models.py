import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from histborrow import BorrowConfig, GridDensity, normalize, tv_distance
from histborrow.errors import DomainError, GeometricLimitUnsupported, SimplexViolation, UnsupportedDimension
from histborrow.models import (
    BetaBernoulliBorrowModel,
    DirichletMultinomialBorrowModel,
    GaussianBorrowModel,
    beta_bernoulli_generalized_logdensity,
    beta_grid,
    beta_posterior_grid,
    dirichlet_multinomial_generalized_logdensity,
    dirichlet_posterior_simplex,
    illustrative_models,
    gaussian_generalized_logdensity,
    gaussian_log_p0,
    gaussian_log_p1,
    gaussian_posterior_grid,
    normalize_simplex,
    simplex_grid,
    simplex_tv,
)
from histborrow.posterior import power_mean_log

from conftest import random_beta_model, random_cfg, random_dirichlet_model, random_gaussian_model

seeds = st.integers(0, 2**31)


def test_gaussian_empty_data_is_prior():
    m = GaussianBorrowModel(1.0, 0.5, 2.0)
    th = np.linspace(-3, 3, 7)
    want = stats.norm.logpdf(th, 0.5, np.sqrt(2.0))
    assert np.allclose(gaussian_log_p0(m, th), want) and np.allclose(gaussian_log_p1(m, th), want)


def test_gaussian_p1_minus_p0_is_historical_loglik():
    y = np.array([1.5, 2.5, 0.3])
    m = GaussianBorrowModel.from_data([0.2, 0.9], y, 1.7, 0.0, 1.0)
    th = np.linspace(-2, 3, 11)
    want = stats.norm.logpdf(y[None, :], th[:, None], np.sqrt(1.7)).sum(axis=1)
    assert np.allclose(gaussian_log_p1(m, th) - gaussian_log_p0(m, th), want, atol=1e-12)


def test_gaussian_single_observation_conjugate():
    m = GaussianBorrowModel.from_data([1.0], [], 1.0, 1.0, 1.0)
    xs = np.linspace(-7, 9, 4001)
    g = gaussian_posterior_grid(m, BorrowConfig(0.0, 0.5), xs)
    assert np.max(np.abs(g.pdf - stats.norm.pdf(xs, 1.0, np.sqrt(0.5)))) < 1e-7


def test_gaussian_closed_form_pointwise():
    m = GaussianBorrowModel.from_data([0.7, 1.4, 1.1], [2.0, 2.4], 1.0, 1.0, 1.0)
    th = np.linspace(-6, 8, 1401)
    for a in (-0.9, 0.0, 1.0, 3.0):
        cfg = BorrowConfig(0.4, a)
        closed = gaussian_generalized_logdensity(m, cfg, th)
        generic = power_mean_log(gaussian_log_p0(m, th), gaussian_log_p1(m, th), cfg.xi, cfg.z)
        d = closed - generic
        assert np.max(np.abs(d - d.mean())) < 1e-8


def test_gaussian_geometric_unsupported():
    m = GaussianBorrowModel(1.0, 0.0, 1.0)
    with pytest.raises(GeometricLimitUnsupported):
        gaussian_generalized_logdensity(m, BorrowConfig(0.5, -1.0), 0.0)


def test_illustrative_configurations_are_proper():
    g, b, d = illustrative_models()
    for a in (-0.9, 0.0, 1.0, 3.0):
        cfg = BorrowConfig(0.5, a)
        dens = gaussian_posterior_grid(g, cfg)
        assert np.all(np.isfinite(dens.log_vals)) and dens.mass() == pytest.approx(1.0, abs=1e-6)
        s = dirichlet_posterior_simplex(d, cfg, 60)
        assert np.all(np.isfinite(s.log_vals))
    closed = beta_posterior_grid(b, BorrowConfig(0.5, 0.5))
    generic = beta_posterior_grid(b, BorrowConfig(0.5, 0.5), closed_form=False)
    assert tv_distance(closed, generic) <= 1e-8


def beta_moments(a, b):
    return a / (a + b), a * b / ((a + b) ** 2 * (a + b + 1))


@given(seeds)
def test_conjugate_reductions(seed):
    rng = np.random.default_rng(seed)
    m = random_beta_model(rng)
    a = float(rng.uniform(-0.5, 3))
    # shapes near 1 give a root-type cusp at the boundary; trapezoid needs a fine grid
    xs = beta_grid(40001)
    g0 = beta_posterior_grid(m, BorrowConfig(0.0, a), xs)
    g1 = beta_posterior_grid(m, BorrowConfig(1.0, a), xs)
    for g, (aa, bb) in ((g0, (m.S_X + m.alpha0, m.n - m.S_X + m.beta0)),
                        (g1, (m.S_X + m.S_Y + m.alpha0, m.n + m.n0 - m.S_X - m.S_Y + m.beta0))):
        mu, var = beta_moments(aa, bb)
        assert g.mean() == pytest.approx(mu, abs=1e-6)
        assert g.variance() == pytest.approx(var, abs=1e-6)
    gm = random_gaussian_model(rng)
    for xi, (nn, s) in ((0.0, (gm.n, gm.S_X)), (1.0, (gm.n + gm.n0, gm.S_X + gm.S_Y))):
        prec = nn / gm.sigma2 + 1 / gm.tau02
        g = gaussian_posterior_grid(gm, BorrowConfig(xi, a))
        assert g.mean() == pytest.approx((s / gm.sigma2 + gm.mu0 / gm.tau02) / prec, abs=1e-6)
        assert g.variance() == pytest.approx(1 / prec, abs=1e-6)


def test_beta_domain_error():
    m = BetaBernoulliBorrowModel(2, 2, 5, 2, 5, 3)
    with pytest.raises(DomainError):
        beta_bernoulli_generalized_logdensity(m, BorrowConfig(0.5, 0.0), np.array([0.0, 0.5]))


def test_beta_not_conjugate_for_large_alpha():
    m = BetaBernoulliBorrowModel(1.0, 1.0, 5, 0, 5, 0)
    g = beta_posterior_grid(m, BorrowConfig(0.5, 3.0))
    mu, var = g.mean(), g.variance()
    k = mu * (1 - mu) / var - 1
    fitted = normalize(GridDensity(g.xs, stats.beta.logpdf(g.xs, mu * k, (1 - mu) * k)))
    assert tv_distance(g, fitted) >= 1e-3


def test_dirichlet_reductions():
    m = DirichletMultinomialBorrowModel((2.0, 3.0, 1.5), (4, 1, 6), (3, 3, 0))
    pts, _ = simplex_grid(3, 30)
    lv = dirichlet_multinomial_generalized_logdensity(m, BorrowConfig(0.0, 1.0), pts)
    want = stats.dirichlet.logpdf(pts.T, np.add(m.alpha0, m.X))
    d = lv - want
    assert np.ptp(d) < 1e-9


def test_dirichlet_k2_matches_beta():
    dm = DirichletMultinomialBorrowModel((2.0, 3.0), (4, 6), (7, 1))
    bm = BetaBernoulliBorrowModel(2.0, 3.0, 10, 4, 8, 7)
    th = np.linspace(0.01, 0.99, 99)
    cfg = BorrowConfig(0.4, 2.0)
    d = dirichlet_multinomial_generalized_logdensity(dm, cfg, np.column_stack([th, 1 - th]))
    b = beta_bernoulli_generalized_logdensity(bm, cfg, th)
    assert np.ptp(d - b) < 1e-9


def test_dirichlet_errors():
    m = DirichletMultinomialBorrowModel((2.0, 2.0, 2.0), (1, 1, 1), (1, 1, 1))
    with pytest.raises(SimplexViolation):
        dirichlet_multinomial_generalized_logdensity(m, BorrowConfig(0.5, 0.0), np.array([0.5, 0.5, 0.1]))
    with pytest.raises(SimplexViolation):
        dirichlet_multinomial_generalized_logdensity(m, BorrowConfig(0.5, 0.0), np.array([0.5, 0.5]))
    with pytest.raises(UnsupportedDimension):
        simplex_grid(4, 10)


def test_simplex_grid():
    pts, w = simplex_grid(3, 2)
    assert pts.shape == (4, 3)
    assert np.allclose(pts.sum(axis=1), 1.0) and np.all(pts > 0)
    assert w.sum() == pytest.approx(0.5)
    pts, w = simplex_grid(3, 200)
    assert np.all(pts.min(axis=1) >= 1 / (3 * 200) - 1e-15)
    mass = np.sum(w * stats.dirichlet.pdf(pts.T, [2, 2, 2]))
    assert mass == pytest.approx(1.0, abs=1e-3)


@given(seeds)
def test_closed_forms_match_generic(seed):
    rng = np.random.default_rng(seed)
    cfg = random_cfg(rng)
    gm = random_gaussian_model(rng)
    assert tv_distance(gaussian_posterior_grid(gm, cfg), gaussian_posterior_grid(gm, cfg, closed_form=False)) <= 1e-6
    bm = random_beta_model(rng)
    assert tv_distance(beta_posterior_grid(bm, cfg), beta_posterior_grid(bm, cfg, closed_form=False)) <= 1e-6
    dm = random_dirichlet_model(rng)
    assert simplex_tv(dirichlet_posterior_simplex(dm, cfg, 60),
                      dirichlet_posterior_simplex(dm, cfg, 60, closed_form=False)) <= 1e-6
