import json

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import expit

from histborrow.errors import DomainError, HistoricalGroupViolation, NoComparablePairs
from histborrow.survival import (
    SYNTHETIC_CURRENT,
    CureRateParams,
    MCMCConfig,
    PriorSpec,
    SubjectRecord,
    TrialConfig,
    borrowing_factor,
    c_index,
    cure_probability,
    current_log_lik,
    expected_event_fraction,
    fit,
    generating_hazard_ratio,
    hazard,
    hazard_ratio,
    historical_log_lik,
    joint_log_posterior,
    km_estimate,
    log_prior,
    read_records_csv,
    subject_log_lik,
    synthesize_trial,
    weibull_log_pdf,
    weibull_log_survival,
    write_records_csv,
)

P = CureRateParams(-0.5, 0.8, 1.3, 2.0, -0.2, 1.1, 2.5, 0.4, 0.5)


def recs(times, events, groups=None):
    groups = groups if groups is not None else [0] * len(times)
    return [SubjectRecord(float(t), int(e), int(g)) for t, e, g in zip(times, events, groups)]


def test_cure_probability():
    assert cure_probability(0, 0, 0) == 0.5 and cure_probability(0, 0, 1) == 0.5
    assert cure_probability(0, 1e4, 1) == 1.0
    assert cure_probability(np.log(3), 5.0, 0) == pytest.approx(0.75, abs=1e-15)


def test_weibull():
    t = np.array([0.5, 1.0, 3.0])
    assert np.allclose(weibull_log_survival(t, 1.0, 2.0), -t / 2.0)
    for shape in (0.5, 1.0, 3.0):
        assert weibull_log_survival(2.0, shape, 2.0) == pytest.approx(-1.0)
    val, _ = integrate.quad(lambda x: np.exp(weibull_log_pdf(x, 1.5, 2.0)), 0, np.inf)
    assert val == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        weibull_log_pdf(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        weibull_log_survival(1.0, 0.0, 1.0)


def test_subject_log_lik_limits():
    cured = CureRateParams(50.0, 0.0, 1.3, 2.0)
    assert subject_log_lik(SubjectRecord(3.0, 0, 0), cured) == pytest.approx(0.0, abs=1e-20)
    never = CureRateParams(-800.0, 0.0, 1.3, 2.0)
    assert subject_log_lik(SubjectRecord(3.0, 1, 0), never) == pytest.approx(weibull_log_pdf(3.0, 1.3, 2.0))


def test_three_subject_direct_product():
    data = recs([0.7, 2.5, 4.0], [1, 0, 1], [0, 1, 1])
    total = 1.0
    for r in data:
        pi = expit(P.gamma0_cur + P.gamma1_cur * r.group)
        f = np.exp(weibull_log_pdf(r.time, P.shape_cur, P.scale_cur))
        s = np.exp(weibull_log_survival(r.time, P.shape_cur, P.scale_cur))
        total *= (1 - pi) * f if r.event else pi + (1 - pi) * s
    assert current_log_lik(data, P) == pytest.approx(np.log(total), abs=1e-12)
    assert sum(subject_log_lik(r, P) for r in data) == pytest.approx(np.log(total), abs=1e-12)


def test_historical_log_lik():
    hist = recs([0.7, 2.5, 4.0], [1, 0, 1])
    as_cur = CureRateParams(P.gamma0_hist, 0.0, P.shape_hist, P.scale_hist)
    assert historical_log_lik(hist, P) == pytest.approx(current_log_lik(hist, as_cur), abs=1e-12)
    with pytest.raises(HistoricalGroupViolation):
        historical_log_lik(recs([1.0], [1], [1]), P)


def test_joint_posterior_endpoints():
    cur = recs([0.7, 2.5, 4.0, 1.1], [1, 0, 1, 1], [0, 1, 1, 0])
    hist = recs([0.9, 3.0, 5.0], [1, 1, 0])
    pri = PriorSpec()
    base = current_log_lik(cur, P)
    p0 = CureRateParams(**{**P.__dict__, "xi": 0.0})
    p1 = CureRateParams(**{**P.__dict__, "xi": 1.0})
    assert joint_log_posterior(cur, hist, p0, pri) == pytest.approx(base + log_prior(p0, pri))
    want = base + historical_log_lik(hist, p1) + log_prior(p1, pri)
    assert joint_log_posterior(cur, hist, p1, pri) == pytest.approx(want)


def test_borrowing_factor_stable_far_tail():
    mpmath.mp.prec = 256
    got = borrowing_factor(-2000.0, 0.5, 1.5)
    want = mpmath.log(mpmath.mpf("0.5") + mpmath.mpf("0.5") * mpmath.exp(mpmath.mpf(1.5) * -2000)) / 1.5
    assert np.isfinite(got) and got == pytest.approx(float(want), abs=1e-12)
    # the far tail still matters when the non-borrowing weight is zero
    assert borrowing_factor(-2000.0, 1.0, 1.5) == -2000.0


def test_joint_posterior_finite_far_tail():
    cur = recs([0.7, 2.5, 4.0, 1.1], [1, 0, 1, 1], [0, 1, 1, 0])
    hist = recs([0.9, 3.0, 5.0], [1, 1, 0])
    p = CureRateParams(**{**P.__dict__, "xi": 0.5, "alpha_gp": 2.0})
    lh = historical_log_lik(hist, p)
    v = joint_log_posterior(cur, hist, p, PriorSpec(), hist_offset=lh + 2000.0)
    assert np.isfinite(v)


def test_no_borrowing_ignores_history():
    cur = recs([0.7, 2.5, 4.0, 1.1], [1, 0, 1, 1], [0, 1, 1, 0])
    p = CureRateParams(**{**P.__dict__, "xi": 0.0})
    a = joint_log_posterior(cur, recs([0.9, 3.0], [1, 1]), p, PriorSpec())
    b = joint_log_posterior(cur, recs([7.9, 0.1], [0, 1]), p, PriorSpec())
    assert a == b


@given(st.floats(-3000, -1e-3), st.floats(0, 1), st.floats(0.05, 5))
def test_borrowing_factor_monotone_and_bounded(lh, xi, z):
    b = borrowing_factor(lh, xi, z)
    assert lh - 1e-9 <= b <= 1e-12
    assert borrowing_factor(lh, min(1.0, xi + 0.05), z) <= b + 1e-12


def test_hazard_ratio_cases():
    same = CureRateParams(0.3, 0.0, 1.4, 2.0)
    assert hazard_ratio(1.7, same) == pytest.approx(1.0)
    no_cure = CureRateParams(-800.0, 0.0, 1.4, 2.0)
    assert hazard_ratio(0.9, no_cure) == pytest.approx(1.0)
    p = CureRateParams(0.0, 1.0, 1.0, 1.0)
    h = 1e-6
    for g in (0, 1):
        pi = expit(p.gamma0_cur + p.gamma1_cur * g)

        def surv(t):
            return pi + (1 - pi) * np.exp(-t)

        fd = -(surv(1 + h) - surv(1 - h)) / (2 * h) / surv(1.0)
        assert hazard(1.0, g, p) == pytest.approx(fd, abs=1e-3)
    fd_hr = hazard(1.0, 1, p) / hazard(1.0, 0, p)
    assert hazard_ratio(1.0, p) == pytest.approx(fd_hr, abs=1e-12)


@given(st.floats(0.1, 10), st.floats(0.2, 5))
def test_hazard_ratio_time_units(c, t0):
    q = CureRateParams(P.gamma0_cur, P.gamma1_cur, P.shape_cur, P.scale_cur * c)
    assert hazard_ratio(t0 * c, q) == pytest.approx(hazard_ratio(t0, P), rel=1e-10)


def test_c_index_cases():
    data = recs([1, 2, 3, 4], [1, 1, 1, 1])
    assert c_index(data, scores=[0.1, 0.2, 0.3, 0.4]) == 1.0
    assert c_index(data, scores=[0.5] * 4) == 0.5
    hand = recs([1, 2, 3, 4], [1, 0, 1, 0])
    # comparable: (1,2) (1,3) (1,4) (3,4); scores give 1, 0.5, 0, 0
    assert c_index(hand, scores=[0.1, 0.4, 0.1, 0.05]) == pytest.approx((1 + 0.5 + 0 + 0) / 4)
    three = recs([1, 2, 3], [1, 0, 0])
    assert c_index(three, scores=[0.1, 0.3, 0.1]) == pytest.approx((1 + 0.5) / 2)
    four = recs([1, 2, 3, 4], [1, 0, 0, 1])
    # comparable pairs (1,2), (1,3), (1,4): concordant, tied, concordant
    assert c_index(four, scores=[0.2, 0.3, 0.2, 0.4]) == pytest.approx((1 + 0.5 + 1) / 3)
    assert c_index(data, scores=[0.4, 0.3, 0.2, 0.1], earlier_higher=True) == 1.0
    with pytest.raises(NoComparablePairs):
        c_index(recs([1, 2], [0, 0]), scores=[0.1, 0.2])


@given(st.integers(0, 2**31))
def test_c_index_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    data = recs(rng.uniform(0.1, 5, 15), rng.integers(0, 2, 15) | np.eye(15, dtype=int)[0])
    s = rng.random(15)
    assert c_index(data, scores=s) == c_index(data, scores=np.exp(3 * s) - 7)


def test_km_oracles():
    km = km_estimate(recs([1, 2, 3], [0, 0, 0]))
    assert km.at(10.0) == 1.0 and km.times.size == 0
    km = km_estimate(recs([1, 2, 3, 4, 5], [1, 1, 1, 1, 1]))
    assert km.at(2.0) == 3 / 5
    km = km_estimate(recs([1, 2, 3, 4, 5], [1, 0, 1, 0, 0]))
    assert km.at(3.0) == 8 / 15
    # Greenwood at t=3: S^2 [1/(5*4) + 1/(3*2)]
    assert km.greenwood_var[1] == pytest.approx((8 / 15) ** 2 * (1 / 20 + 1 / 6))
    assert np.all((km.ci95_lo >= 0) & (km.ci95_hi <= 1))
    assert km.to_csv().splitlines()[0] == "time,survival,greenwood_var,ci95_lo,ci95_hi,at_risk,events"


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=30))
def test_km_uncensored_is_empirical(times):
    t = np.array(times)
    km = km_estimate(t, np.ones_like(t))
    for u in np.unique(t):
        assert km.at(u) == pytest.approx(np.mean(t > u), abs=1e-12)


def test_synthesize_extremes():
    all_events = synthesize_trial(TrialConfig(50, (0.0, 0.0), ((1.2, 2.0), (1.2, 2.0)), 0.0, np.inf, False, 1))
    assert all(r.event == 1 for r in all_events)
    cured = synthesize_trial(TrialConfig(50, (1.0, 1.0), ((1.2, 2.0), (1.2, 2.0)), 0.0, 15.0, False, 1))
    assert all(r.event == 0 and r.time == 15.0 for r in cured)
    a = synthesize_trial(TrialConfig(20, seed=4))
    assert a == synthesize_trial(TrialConfig(20, seed=4))
    assert {r.group for r in synthesize_trial(TrialConfig(20, control_only=True))} == {0}


def test_event_fraction():
    n = 20000
    cfg = TrialConfig(n, (0.3, 0.3), ((1.2, 2.0), (1.2, 2.0)), 0.1, np.inf, False, 7)
    frac = np.mean([r.event for r in synthesize_trial(cfg)])
    want = expected_event_fraction(0.3, 1.2, 2.0, 0.1)
    assert abs(frac - want) <= 3 * np.sqrt(want * (1 - want) / n)


def test_records_csv_roundtrip():
    data = synthesize_trial(TrialConfig(12, seed=2))
    text = write_records_csv(data)
    assert text.splitlines()[0] == "time,event,group"
    assert read_records_csv(text) == data


def test_fit_schema_and_determinism():
    cur = synthesize_trial(TrialConfig(80, seed=1))
    hist = synthesize_trial(TrialConfig(60, control_only=True, seed=2))
    cfg = MCMCConfig(2, 800, 300, 3)
    a = fit(cur, hist, PriorSpec(), cfg)
    b = fit(cur, hist, PriorSpec(), cfg)
    assert a.summary_json() == b.summary_json()
    s = json.loads(a.summary_json())
    for key in ("alpha_mean", "xi_mean", "hr_mean", "hpd_lo", "hpd_hi", "c_index", "max_r_hat"):
        assert key in s
    assert all({"r_hat", "ess"} <= set(v) for v in s["parameters"].values())
    assert s["hpd_lo"] <= s["hr_mean"] <= s["hpd_hi"]
    with pytest.raises(HistoricalGroupViolation):
        fit(cur, cur, PriorSpec(), cfg)
    with pytest.raises(ValueError):
        fit(cur, hist, PriorSpec(), MCMCConfig(1, 800, 300, 3))


@pytest.mark.slow
def test_no_borrowing_calibration():
    hits = 0
    for rep in range(20):
        cfg = TrialConfig(200, SYNTHETIC_CURRENT.cure_probs, SYNTHETIC_CURRENT.weibull, 0.05, 15.0, False,
                          100 + rep)
        cur = synthesize_trial(cfg)
        hist = synthesize_trial(TrialConfig(50, control_only=True, seed=500 + rep))
        res = fit(cur, hist, PriorSpec(fixed_xi=0.0), MCMCConfig(2, 3000, 1000, rep)).summary
        true_hr = generating_hazard_ratio(cfg, res["t0"])
        hits += res["hpd_lo"] <= true_hr <= res["hpd_hi"]
    assert hits >= 18
