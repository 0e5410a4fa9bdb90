"""Cure-rate Weibull survival model with generalized power borrowing.

Each subject is cured with probability ``pi = expit(g0 + g1 * group)``;
uncured subjects have a Weibull(shape, scale) event time.  The historical
control arm enters the posterior through

    (1/z) log{(1 - xi) + xi exp(z * l_hist)},

evaluated as a two-term log-sum-exp so that ``l_hist`` of order -1e3 does
not underflow.  :func:`fit` samples the joint posterior with the adaptive
Metropolis sampler from :mod:`histborrow.mcmc` and reports Table-style
summaries (alpha, xi, hazard ratio with HPD, C-index, diagnostics).
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import integrate, optimize
from scipy.special import expit, gammaln, log_expit, logit
from scipy.stats import beta as beta_dist

from .errors import (
    DomainError,
    GeometricLimitUnsupported,
    HistoricalGroupViolation,
    NoComparablePairs,
)
from .mcmc import Transform, ess, hpd_interval, r_hat, run_chains

Z975 = 1.96


# ------------------------------------------------------------------ records


@dataclass(frozen=True)
class SubjectRecord:
    time: float
    event: int
    group: int = 0

    def __post_init__(self):
        if not self.time > 0:
            raise DomainError("time must be positive")
        if self.event not in (0, 1) or self.group not in (0, 1):
            raise ValueError("event and group must be 0 or 1")


def as_arrays(records):
    """``(time, event, group)`` arrays from records or an existing tuple."""
    if isinstance(records, tuple) and len(records) == 3 and isinstance(records[0], np.ndarray):
        return records
    t = np.array([r.time for r in records], dtype=float)
    d = np.array([r.event for r in records], dtype=float)
    g = np.array([r.group for r in records], dtype=float)
    return t, d, g


def read_records_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"time", "event", "group"}:
        raise ValueError("expected header time,event,group")
    return [SubjectRecord(float(r["time"]), int(r["event"]), int(r["group"])) for r in rows]


def write_records_csv(records):
    buf = io.StringIO()
    buf.write("time,event,group\n")
    for r in records:
        buf.write(f"{float(r.time)!r},{int(r.event)},{int(r.group)}\n")
    return buf.getvalue()


@dataclass(frozen=True)
class CureRateParams:
    gamma0_cur: float
    gamma1_cur: float
    shape_cur: float
    scale_cur: float
    gamma0_hist: float = 0.0
    shape_hist: float = 1.0
    scale_hist: float = 1.0
    xi: float = 0.0
    alpha_gp: float = 1.0

    def __post_init__(self):
        if min(self.shape_cur, self.scale_cur, self.shape_hist, self.scale_hist) <= 0:
            raise DomainError("Weibull shapes and scales must be positive")
        if not 0.0 <= self.xi <= 1.0:
            raise DomainError("xi must lie in [0, 1]")
        if self.alpha_gp <= -1:
            raise DomainError("alpha_gp must exceed -1")

    @property
    def z(self):
        return 0.5 * (1.0 + self.alpha_gp)


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters.

    ``alpha ~ N(mu_alpha, sigma_alpha)`` restricted to ``alpha > -1`` and
    ``xi ~ Beta(a_xi, b_xi)``; both sigma arguments are standard deviations.
    Regression coefficients get ``N(0, gamma_sd)`` and Weibull shapes and
    scales ``Gamma(gamma_shape, rate=gamma_rate)``.
    """

    mu_alpha: float = 0.0
    sigma_alpha: float = 1.0
    a_xi: float = 2.0
    b_xi: float = 2.0
    fixed_xi: float | None = None
    fixed_alpha: float | None = None
    gamma_sd: float = 10.0
    gamma_shape: float = 2.0
    gamma_rate: float = 1.0

    def __post_init__(self):
        for name in ("sigma_alpha", "a_xi", "b_xi", "gamma_sd", "gamma_shape", "gamma_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.fixed_xi is not None and not 0 <= self.fixed_xi <= 1:
            raise ValueError("fixed_xi must lie in [0, 1]")
        if self.fixed_alpha is not None and self.fixed_alpha <= -1:
            raise ValueError("fixed_alpha must exceed -1")


# --------------------------------------------------------------- primitives


def cure_probability(gamma0, gamma1, g):
    return expit(gamma0 + gamma1 * np.asarray(g, dtype=float))


def _check_positive(*vals):
    for v in vals:
        if np.any(np.asarray(v) <= 0):
            raise DomainError("time, shape and scale must be positive")


def weibull_log_pdf(t, shape, scale):
    _check_positive(t, shape, scale)
    t = np.asarray(t, dtype=float)
    return np.log(shape / scale) + (shape - 1) * np.log(t / scale) - (t / scale) ** shape


def weibull_log_survival(t, shape, scale):
    _check_positive(t, shape, scale)
    return -((np.asarray(t, dtype=float) / scale) ** shape)


def _loglik(t, d, g, g0, g1, shape, scale):
    eta = g0 + g1 * g
    log_pi, log_1mpi = log_expit(eta), log_expit(-eta)
    u = (t / scale) ** shape
    log_f = np.log(shape / scale) + (shape - 1) * np.log(t / scale) - u
    ev = log_1mpi + log_f
    cens = np.logaddexp(log_pi, log_1mpi - u)
    return np.where(d == 1, ev, cens)


def subject_log_lik(rec, params):
    """Log of ``[(1-pi) f]^delta [pi + (1-pi) S]^(1-delta)`` for one subject."""
    p = params
    return float(_loglik(np.float64(rec.time), rec.event, rec.group, p.gamma0_cur, p.gamma1_cur,
                         p.shape_cur, p.scale_cur))


def current_log_lik(records, params):
    t, d, g = as_arrays(records)
    p = params
    return float(_loglik(t, d, g, p.gamma0_cur, p.gamma1_cur, p.shape_cur, p.scale_cur).sum())


def historical_log_lik(hist, params):
    """Sum of the cure-mixture log-likelihood under the historical parameters."""
    t, d, g = as_arrays(hist)
    if np.any(g != 0):
        raise HistoricalGroupViolation("historical records must all be controls (group 0)")
    p = params
    return float(_loglik(t, d, g, p.gamma0_hist, 0.0, p.shape_hist, p.scale_hist).sum())


def borrowing_factor(l_hist, xi, z):
    """``(1/z) log{(1 - xi) + xi exp(z l_hist)}`` without forming ``exp(z l_hist)``."""
    if xi == 0.0:
        return 0.0
    if xi == 1.0:
        return float(l_hist)
    if abs(z) < 1e-8:
        raise GeometricLimitUnsupported("borrowing factor needs z != 0 when 0 < xi < 1")
    return float(np.logaddexp(np.log1p(-xi), np.log(xi) + z * l_hist) / z)


def _log_gamma_prior(x, shape, rate):
    return (shape - 1) * np.log(x) - rate * x + shape * np.log(rate) - gammaln(shape)


def _log_normal_prior(x, mu, sd):
    return -0.5 * np.log(2 * np.pi * sd * sd) - (x - mu) ** 2 / (2 * sd * sd)


def log_prior(params, priors, include_hist=True):
    """Log prior density on the constrained scale (no Jacobians)."""
    p, q = params, priors
    lp = _log_normal_prior(p.gamma0_cur, 0, q.gamma_sd) + _log_normal_prior(p.gamma1_cur, 0, q.gamma_sd)
    lp += _log_gamma_prior(p.shape_cur, q.gamma_shape, q.gamma_rate)
    lp += _log_gamma_prior(p.scale_cur, q.gamma_shape, q.gamma_rate)
    if include_hist:
        lp += _log_normal_prior(p.gamma0_hist, 0, q.gamma_sd)
        lp += _log_gamma_prior(p.shape_hist, q.gamma_shape, q.gamma_rate)
        lp += _log_gamma_prior(p.scale_hist, q.gamma_shape, q.gamma_rate)
    if q.fixed_xi is None:
        lp += float(beta_dist.logpdf(p.xi, q.a_xi, q.b_xi))
    if q.fixed_alpha is None:
        lp += _log_normal_prior(p.alpha_gp, q.mu_alpha, q.sigma_alpha)
    return float(lp)


def joint_log_posterior(current, hist, params, priors, hist_offset=0.0, include_hist_priors=True):
    """Unnormalized log joint posterior on the constrained scale.

    ``sum log L_i + (1/z) log{(1-xi) + xi exp(z (l_hist - hist_offset))} + log pi0``.
    ``hist_offset = 0`` is the literal form; :func:`fit` by default passes
    the maximum of ``l_hist`` so the historical likelihood is on a
    profile-normalized scale.
    """
    l_cur = current_log_lik(current, params)
    l_hist = historical_log_lik(hist, params) - hist_offset
    return l_cur + borrowing_factor(l_hist, params.xi, params.z) + log_prior(params, priors, include_hist_priors)


def log_hazard(t, g, params):
    p = params
    eta = p.gamma0_cur + p.gamma1_cur * g
    u = (t / p.scale_cur) ** p.shape_cur
    log_f = np.log(p.shape_cur / p.scale_cur) + (p.shape_cur - 1) * np.log(t / p.scale_cur) - u
    return log_expit(-eta) + log_f - np.logaddexp(log_expit(eta), log_expit(-eta) - u)


def hazard(t, g, params):
    """Population hazard ``(1-pi) f / (pi + (1-pi) S)`` for arm ``g``."""
    _check_positive(t)
    return float(np.exp(log_hazard(np.float64(t), g, params)))


def hazard_ratio(t0, params):
    """Treatment-to-control hazard ratio at ``t0``."""
    _check_positive(t0)
    return float(np.exp(log_hazard(np.float64(t0), 1, params) - log_hazard(np.float64(t0), 0, params)))


def risk_score(rec, params, t=None):
    """``pi + (1 - pi) S(t)``; ``t`` defaults to the subject's own time."""
    p = params
    pi = cure_probability(p.gamma0_cur, p.gamma1_cur, rec.group)
    tt = rec.time if t is None else t
    return float(pi + (1 - pi) * np.exp(-((tt / p.scale_cur) ** p.shape_cur)))


def c_index(records, params=None, scores=None, earlier_higher=False):
    """Concordance over comparable pairs, ties in score counting one half.

    A pair is comparable when ``t_i < t_j`` and subject ``i`` had the event.
    With ``earlier_higher=False`` (Harrell orientation for survival-type
    scores) the pair is concordant when ``r_i < r_j``; with ``True`` when
    ``r_i > r_j``.
    """
    t, d, _ = as_arrays(records)
    if scores is None:
        scores = np.array([risk_score(r, params) for r in records])
    r = np.asarray(scores, dtype=float)
    comp = (t[:, None] < t[None, :]) & (d[:, None] == 1)
    if not comp.any():
        raise NoComparablePairs("no comparable pairs")
    diff = r[:, None] - r[None, :]
    good = diff > 0 if earlier_higher else diff < 0
    score = np.where(diff == 0, 0.5, good.astype(float))
    return float(score[comp].mean())


# ------------------------------------------------------------ Kaplan-Meier


@dataclass(frozen=True)
class KMResult:
    times: np.ndarray
    survival: np.ndarray
    greenwood_var: np.ndarray
    ci95_lo: np.ndarray
    ci95_hi: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def at(self, t):
        """Right-continuous step value at ``t``."""
        i = np.searchsorted(self.times, t, side="right") - 1
        return 1.0 if i < 0 else float(self.survival[i])

    def to_csv(self):
        buf = io.StringIO()
        buf.write("time,survival,greenwood_var,ci95_lo,ci95_hi,at_risk,events\n")
        for row in zip(self.times, self.survival, self.greenwood_var, self.ci95_lo, self.ci95_hi,
                       self.at_risk, self.events):
            buf.write(",".join([*(repr(float(v)) for v in row[:5]), str(int(row[5])), str(int(row[6]))]) + "\n")
        return buf.getvalue()


def km_estimate(times, events=None):
    """Product-limit estimator with Greenwood variance and a 95% Wald band.

    Accepts records or parallel ``times, events`` arrays.  Values are
    reported at distinct event times; with no events the estimate is one.
    """
    if events is None:
        t, d, _ = as_arrays(times)
    else:
        t, d = np.asarray(times, dtype=float), np.asarray(events, dtype=float)
    if t.size == 0:
        raise ValueError("need at least one record")
    ut = np.unique(t[d == 1])
    n_risk = np.array([(t >= u).sum() for u in ut], dtype=float)
    n_ev = np.array([((t == u) & (d == 1)).sum() for u in ut], dtype=float)
    # exact rational product, so hand-computable values come out correctly rounded
    acc, surv = Fraction(1), np.empty(ut.size)
    for i, (r, e) in enumerate(zip(n_risk.astype(int), n_ev.astype(int))):
        acc *= Fraction(int(r - e), int(r))
        surv[i] = float(acc)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(n_risk > n_ev, n_ev / (n_risk * (n_risk - n_ev)), 0.0)
    var = surv**2 * np.cumsum(terms)
    var = np.where(surv == 0, 0.0, var)
    half = Z975 * np.sqrt(var)
    return KMResult(ut, surv, var, np.clip(surv - half, 0, 1), np.clip(surv + half, 0, 1),
                    n_risk.astype(int), n_ev.astype(int))


# ------------------------------------------------------------ synthetic data


@dataclass(frozen=True)
class TrialConfig:
    """Synthetic trial.  ``cure_probs`` and ``weibull`` are per arm (control, treatment)."""

    n: int
    cure_probs: tuple = (0.3, 0.5)
    weibull: tuple = ((1.2, 2.0), (1.2, 2.0))
    censor_rate: float = 0.05
    horizon: float = 15.0
    control_only: bool = False
    seed: int = 0


def synthesize_trial(config):
    """Simulate subjects; deterministic in ``config.seed``.

    Groups alternate control/treatment unless ``control_only``.  Cured
    subjects are censored at ``min(horizon, C)`` with ``C ~ Exp(censor_rate)``;
    uncured subjects are observed at ``min(T, C, horizon)``.
    """
    c = config
    if c.n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(c.seed)
    g = np.zeros(c.n, dtype=int) if c.control_only else np.arange(c.n) % 2
    pi = np.asarray(c.cure_probs, dtype=float)[g]
    cured = rng.random(c.n) < pi
    shape = np.array([c.weibull[k][0] for k in g])
    scale = np.array([c.weibull[k][1] for k in g])
    event_t = scale * rng.weibull(shape)
    cens = rng.exponential(1.0 / c.censor_rate, c.n) if c.censor_rate > 0 else np.full(c.n, np.inf)
    limit = np.minimum(cens, c.horizon)
    event = (~cured) & (event_t <= limit)
    time = np.where(event, event_t, limit)
    if np.any(~np.isfinite(time)):
        raise ValueError("infinite follow-up: set a finite horizon or positive censor_rate")
    return [SubjectRecord(float(ti), int(e), int(gi)) for ti, e, gi in zip(time, event, g)]


SYNTHETIC_CURRENT = TrialConfig(200, (0.3, 0.5), ((1.2, 2.0), (1.2, 2.0)), 0.05, 15.0, False, 11)
SYNTHETIC_HIST = TrialConfig(286, (0.22, 0.22), ((1.2, 2.0), (1.2, 2.0)), 0.05, 15.0, True, 12)


def synthetic_pair(current=SYNTHETIC_CURRENT, hist=SYNTHETIC_HIST):
    """Current two-arm trial and a historical control arm with a lower cure rate."""
    return synthesize_trial(current), synthesize_trial(hist)


def generating_hazard_ratio(config, t0):
    """Hazard ratio at ``t0`` implied by a trial config with a shared Weibull law."""
    (a0, b0), (a1, b1) = config.weibull
    if (a0, b0) != (a1, b1):
        raise ValueError("arms must share the Weibull law")
    g0 = float(logit(config.cure_probs[0]))
    g1 = float(logit(config.cure_probs[1])) - g0
    p = CureRateParams(g0, g1, a0, b0, g0, a0, b0, 0.0, 1.0)
    return hazard_ratio(t0, p)


def expected_event_fraction(cure_prob, shape, scale, censor_rate, horizon=np.inf):
    """``(1 - pi) * P(T <= min(C, horizon))`` by quadrature."""
    def integrand(t):
        return np.exp(weibull_log_pdf(t, shape, scale) - censor_rate * t)

    val, _ = integrate.quad(integrand, 0, horizon, limit=200)
    return (1 - cure_prob) * val


# ------------------------------------------------------------- fitting


@dataclass(frozen=True)
class MCMCConfig:
    chains: int = 4
    iterations: int = 50000
    burnin: int = 10000
    seed: int = 0

    @classmethod
    def fast(cls, seed=0):
        return cls(4, 8000, 2000, seed)


PARAM_NAMES = ("gamma0_cur", "gamma1_cur", "shape_cur", "scale_cur",
               "gamma0_hist", "shape_hist", "scale_hist", "xi", "alpha_gp")


def _layout(priors, shared_control):
    names = ["gamma0_cur", "gamma1_cur", "shape_cur", "scale_cur"]
    tr = [Transform.Identity, Transform.Identity, Transform.LogPositive, Transform.LogPositive]
    if not shared_control:
        names += ["gamma0_hist", "shape_hist", "scale_hist"]
        tr += [Transform.Identity, Transform.LogPositive, Transform.LogPositive]
    if priors.fixed_xi is None:
        names.append("xi")
        tr.append(Transform.LogitUnit)
    if priors.fixed_alpha is None:
        names.append("alpha_gp")
        tr.append(Transform.LogPositive)  # on 1 + alpha
    return names, tr


@dataclass
class SurvivalTarget:
    """Picklable log posterior on the unconstrained scale.

    ``alpha_gp`` is sampled as ``log(1 + alpha)``.  With ``shared_control``
    the historical block uses the current control-arm parameters.
    """

    t: np.ndarray
    d: np.ndarray
    g: np.ndarray
    th: np.ndarray
    dh: np.ndarray
    priors: PriorSpec
    shared_control: bool = True
    hist_offset: float = 0.0
    names: list = field(default_factory=list)
    transforms: list = field(default_factory=list)

    def __post_init__(self):
        self.names, self.transforms = _layout(self.priors, self.shared_control)

    def params(self, u):
        vals = {}
        for name, tr, v in zip(self.names, self.transforms, u):
            vals[name] = float(tr.to_constrained(v))
        if "alpha_gp" in vals:
            vals["alpha_gp"] -= 1.0
        else:
            vals["alpha_gp"] = self.priors.fixed_alpha
        if "xi" not in vals:
            vals["xi"] = self.priors.fixed_xi
        if self.shared_control:
            vals["gamma0_hist"] = vals["gamma0_cur"]
            vals["shape_hist"] = vals["shape_cur"]
            vals["scale_hist"] = vals["scale_cur"]
        return CureRateParams(**vals)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(np.abs(u) > 50):
            return -np.inf
        logj = sum(float(tr.log_jacobian(v)) for tr, v in zip(self.transforms, u))
        try:
            p = self.params(u)
        except DomainError:
            return -np.inf
        if 0 < p.xi < 1 and abs(p.z) < 1e-8:
            return -np.inf
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            l_cur = float(_loglik(self.t, self.d, self.g, p.gamma0_cur, p.gamma1_cur, p.shape_cur,
                                  p.scale_cur).sum())
            if p.xi == 0.0:
                b = 0.0
            else:
                l_h = float(_loglik(self.th, self.dh, 0.0, p.gamma0_hist, 0.0, p.shape_hist,
                                    p.scale_hist).sum())
                b = borrowing_factor(l_h - self.hist_offset, p.xi, p.z)
            lp = log_prior(p, self.priors, include_hist=not self.shared_control)
        out = l_cur + b + lp + logj
        return out if np.isfinite(out) else -np.inf


def max_historical_log_lik(hist):
    """Maximum over (gamma0, shape, scale) of the historical log-likelihood."""
    th, dh, gh = as_arrays(hist)
    if np.any(gh != 0):
        raise HistoricalGroupViolation("historical records must all be controls (group 0)")

    def nll(v):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = -_loglik(th, dh, 0.0, v[0], 0.0, np.exp(v[1]), np.exp(v[2])).sum()
        return val if np.isfinite(val) else 1e300

    starts = [(0.0, 0.0, np.log(np.median(th))), (-1.0, 0.3, np.log(np.mean(th))), (1.0, -0.3, 0.0)]
    best = min((optimize.minimize(nll, s, method="Nelder-Mead",
                                  options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 5000}) for s in starts),
               key=lambda r: r.fun)
    return float(-best.fun)


def _initial_points(target, n_chains, seed):
    """Jittered starts around the current-data mode."""
    k = len(target.names)
    base = np.zeros(k)
    t = target.t
    for i, name in enumerate(target.names):
        if name == "scale_cur" or name == "scale_hist":
            base[i] = np.log(np.median(t))
        elif name == "xi":
            base[i] = 0.0
        elif name == "alpha_gp":
            base[i] = np.log1p(max(target.priors.mu_alpha, -0.5))
    res = optimize.minimize(lambda u: -target(u) if np.isfinite(target(u)) else 1e300, base,
                            method="Nelder-Mead", options={"maxiter": 4000, "xatol": 1e-6, "fatol": 1e-8})
    center = res.x if np.isfinite(target(res.x)) else base
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    inits = []
    for _ in range(n_chains):
        for _try in range(100):
            cand = center + 0.3 * rng.standard_normal(k)
            if np.isfinite(target(cand)):
                break
        else:
            cand = center
        inits.append(cand)
    return inits


@dataclass
class FitResult:
    summary: dict
    chains: list
    target: SurvivalTarget

    def summary_json(self):
        return json.dumps(self.summary, indent=2, sort_keys=True)


def _param_draws(target, chains):
    rows = [target.params(u) for c in chains for u in c.draws]
    return rows


def survival_curves(target, chains, times, thin=10):
    """Posterior mean and 95% band of ``pi + (1-pi) S(t)`` per arm."""
    draws = np.concatenate([c.draws[::thin] for c in chains])
    out = {}
    for g in (0, 1):
        curves = []
        for u in draws:
            p = target.params(u)
            pi = cure_probability(p.gamma0_cur, p.gamma1_cur, g)
            curves.append(pi + (1 - pi) * np.exp(-((times / p.scale_cur) ** p.shape_cur)))
        curves = np.array(curves)
        out[g] = (curves.mean(axis=0), np.quantile(curves, 0.025, axis=0), np.quantile(curves, 0.975, axis=0))
    return out


def survival_curves_csv(curves, times):
    buf = io.StringIO()
    buf.write("time,group,survival_mean,survival_lo,survival_hi\n")
    for g, (m, lo, hi) in curves.items():
        for row in zip(times, m, lo, hi):
            buf.write(f"{float(row[0])!r},{g},{float(row[1])!r},{float(row[2])!r},{float(row[3])!r}\n")
    return buf.getvalue()


def fit(current, hist, priors=PriorSpec(), mcmc_config=MCMCConfig(), t0=None, hist_scale="profile",
        shared_control=True, workers=1, rhat_threshold=1.05):
    """Sample the joint posterior and summarize it.

    Parameters
    ----------
    hist_scale : {"profile", "raw"}
        ``"profile"`` subtracts the maximized historical log-likelihood
        before borrowing; ``"raw"`` uses it as is.
    shared_control : bool
        Historical controls share the current control-arm parameters
        (``True``) or get their own (``False``).
    t0 : float, optional
        Hazard-ratio time; defaults to the median observed current time.

    Returns
    -------
    FitResult
        ``summary`` holds ``alpha_mean, xi_mean, hr_mean, hpd_lo, hpd_hi,
        c_index, c_index_t0, t0``, per-parameter diagnostics and a
        ``diagnostics_failure`` flag set when any R-hat exceeds the threshold.
    """
    if mcmc_config.chains < 2:
        raise ValueError("at least two chains are needed for diagnostics")
    if hist_scale not in ("profile", "raw"):
        raise ValueError("hist_scale must be 'profile' or 'raw'")
    t, d, g = as_arrays(current)
    th, dh, gh = as_arrays(hist)
    if np.any(gh != 0):
        raise HistoricalGroupViolation("historical records must all be controls (group 0)")
    if priors.fixed_xi in (0.0, 1.0) and priors.fixed_alpha is None:
        # alpha does not enter the posterior at the endpoints
        priors = replace(priors, fixed_alpha=1.0)
    offset = max_historical_log_lik(hist) if hist_scale == "profile" else 0.0
    target = SurvivalTarget(t, d, g, th, dh, priors, shared_control, offset)
    t0 = float(np.median(t)) if t0 is None else float(t0)
    inits = _initial_points(target, mcmc_config.chains, mcmc_config.seed)
    chains = run_chains(target, inits, mcmc_config.iterations, mcmc_config.burnin, mcmc_config.seed,
                        workers=workers, transforms=target.transforms)

    draws = _param_draws(target, chains)
    hr = np.array([hazard_ratio(t0, p) for p in draws])
    lo, hi = hpd_interval(hr)
    mean_p = CureRateParams(**{k: float(np.mean([getattr(p, k) for p in draws])) for k in PARAM_NAMES})
    recs = [SubjectRecord(float(a), int(b), int(c)) for a, b, c in zip(t, d, g)]
    diag = {}
    for j, name in enumerate(target.names):
        col = np.concatenate([c.draws[:, j] for c in chains])
        vals = np.array([getattr(p, name) for p in draws])
        diag[name] = {
            "mean": float(vals.mean()),
            "sd": float(vals.std(ddof=1)),
            "r_hat": r_hat(chains, j, constrained=False),
            "ess": float(sum(ess(c, j, constrained=False) for c in chains)),
            "unconstrained_mean": float(col.mean()),
        }
    rhats = [v["r_hat"] for v in diag.values()]
    summary = {
        "alpha_mean": float(np.mean([p.alpha_gp for p in draws])) if priors.fixed_alpha is None else None,
        "xi_mean": float(np.mean([p.xi for p in draws])),
        "hr_mean": float(hr.mean()),
        "hpd_lo": lo,
        "hpd_hi": hi,
        "c_index": c_index(recs, mean_p, earlier_higher=True),
        "c_index_t0": c_index(recs, scores=[risk_score(r, mean_p, t=t0) for r in recs]),
        "t0": t0,
        "hist_scale": hist_scale,
        "shared_control": bool(shared_control),
        "acceptance_rate": float(np.mean([c.acceptance_rate for c in chains])),
        "max_r_hat": float(max(rhats)),
        "diagnostics_failure": bool(max(rhats) > rhat_threshold),
        "parameters": diag,
        "priors": asdict(priors),
        "mcmc": asdict(mcmc_config),
    }
    return FitResult(summary, chains, target)
