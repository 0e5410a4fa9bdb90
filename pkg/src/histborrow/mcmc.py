"""Componentwise adaptive random-walk Metropolis with basic diagnostics.

Each iteration proposes a Gaussian move for one coordinate at a time.
During burn-in the per-coordinate step size is multiplied by
``exp((accepted - target) / sqrt(t))``; afterwards it is frozen, so the
retained draws come from a fixed Markov kernel.
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit, log_expit, logit

from .errors import InitInvalid, LengthMismatch


class Transform(str, Enum):
    """Map between a constrained parameter and the real line."""

    Identity = "identity"
    LogPositive = "log"
    LogitUnit = "logit"

    def to_unconstrained(self, x):
        x = np.asarray(x, dtype=float)
        if self is Transform.LogPositive:
            return np.log(x)
        if self is Transform.LogitUnit:
            return logit(x)
        return x

    def to_constrained(self, u):
        u = np.asarray(u, dtype=float)
        if self is Transform.LogPositive:
            return np.exp(u)
        if self is Transform.LogitUnit:
            return expit(u)
        return u

    def log_jacobian(self, u):
        """``log |d constrained / d u|``."""
        u = np.asarray(u, dtype=float)
        if self is Transform.LogPositive:
            return u
        if self is Transform.LogitUnit:
            return log_expit(u) + log_expit(-u)
        return np.zeros_like(u)


def constrain(u, transforms):
    return np.array([Transform(t).to_constrained(v) for t, v in zip(transforms, u)])


@dataclass(frozen=True)
class Chain:
    draws: np.ndarray              # retained, unconstrained
    constrained: np.ndarray        # retained, constrained
    log_density: np.ndarray
    acceptance_rate: float
    accepted: int
    proposed: int
    seed: int
    step_sizes: np.ndarray

    def to_csv(self, names=None):
        k = self.constrained.shape[1]
        names = names or [f"param_{i + 1}" for i in range(k)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", *names, "log_density"])
        for i, (row, ld) in enumerate(zip(self.constrained, self.log_density)):
            w.writerow([i, *(repr(float(v)) for v in row), repr(float(ld))])
        return buf.getvalue()


def adaptive_rw_metropolis(log_target, init, iterations, burnin, seed, target_accept=0.30,
                           init_step=0.5, transforms=None):
    """Sample ``log_target`` (a function of the unconstrained vector).

    Parameters
    ----------
    iterations : int
        Total iterations including ``burnin``.
    transforms : sequence of Transform, optional
        Used only to fill :attr:`Chain.constrained`; ``log_target`` must
        already include any Jacobian terms.

    Non-finite proposal values are rejected.
    """
    if not iterations > burnin >= 0:
        raise ValueError("need iterations > burnin >= 0")
    x = np.array(init, dtype=float).ravel()
    k = x.size
    lp = float(log_target(x))
    if not np.isfinite(lp):
        raise InitInvalid("log_target(init) is not finite")
    transforms = [Transform(t) for t in transforms] if transforms else [Transform.Identity] * k
    rng = np.random.default_rng(seed)
    step = np.full(k, float(init_step))
    keep = iterations - burnin
    draws = np.empty((keep, k))
    trace = np.empty(keep)
    acc = 0
    for t in range(iterations):
        noise = rng.standard_normal(k)
        logu = np.log(rng.random(k))
        for j in range(k):
            old = x[j]
            x[j] = old + step[j] * noise[j]
            lp_new = float(log_target(x))
            ok = np.isfinite(lp_new) and logu[j] < lp_new - lp
            if ok:
                lp = lp_new
            else:
                x[j] = old
            if t < burnin:
                step[j] *= np.exp((float(ok) - target_accept) / np.sqrt(t + 1))
            else:
                acc += ok
        if t >= burnin:
            draws[t - burnin] = x
            trace[t - burnin] = lp
    constrained = np.column_stack([tr.to_constrained(draws[:, j]) for j, tr in enumerate(transforms)])
    proposed = keep * k
    return Chain(draws, constrained, trace, acc / proposed, int(acc), int(proposed), int(seed), step)


def _run_one(args):
    return adaptive_rw_metropolis(*args[:-1], **args[-1])


def run_chains(log_target, inits, iterations, burnin, seed, workers=1, **kw):
    """Run one chain per init with seeds spawned from ``seed``.

    With ``workers > 1`` chains run in a process pool, so ``log_target``
    must be picklable (a module-level function or a dataclass instance).
    """
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(inits))]
    jobs = [(log_target, init, iterations, burnin, s, kw) for init, s in zip(inits, seeds)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            return list(ex.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def _column(chains, index, constrained=True):
    return [np.asarray(c.constrained[:, index] if constrained else c.draws[:, index]) for c in chains]


def _split(cols):
    n = min(len(c) for c in cols)
    if any(len(c) != n for c in cols):
        raise LengthMismatch("chains must have equal retained lengths")
    if n < 4:
        raise LengthMismatch("chains need at least 4 retained draws")
    h = n // 2
    return np.array([part for c in cols for part in (c[:h], c[n - h:])])


def _psrf(x):
    m, n = x.shape
    w = x.var(axis=1, ddof=1).mean()
    b = n * x.mean(axis=1).var(ddof=1)
    if w == 0:
        return 1.0 if b == 0 else float("inf")
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


def r_hat(chains, parameter_index=0, rank_normalized=False, constrained=True):
    """Split-chain potential scale reduction factor.

    The default is the classic split R-hat.  ``rank_normalized=True`` applies
    the rank-normalized folded variant and returns the larger of the bulk
    and tail values.
    """
    cols = _column(chains, parameter_index, constrained) if isinstance(chains[0], Chain) else [
        np.asarray(c, dtype=float) for c in chains]
    x = _split(cols)
    if not rank_normalized:
        return _psrf(x)
    from scipy.stats import norm, rankdata

    def z(a):
        r = rankdata(a, method="average").reshape(a.shape)
        return norm.ppf((r - 0.375) / (a.size + 0.25))

    bulk = _psrf(z(x))
    tail = _psrf(z(np.abs(x - np.median(x))))
    return max(bulk, tail)


def _autocorr(x):
    n = x.size
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    return acov / acov[0]


def ess(chain, parameter_index=0, constrained=True):
    """Effective sample size with Geyer's initial positive sequence.

    Accepts a :class:`Chain` or a 1-D array of draws.
    """
    x = np.asarray(chain.constrained[:, parameter_index] if constrained else chain.draws[:, parameter_index]) \
        if isinstance(chain, Chain) else np.asarray(chain, dtype=float)
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 draws")
    if np.ptp(x) == 0:
        return 1.0
    rho = _autocorr(x)
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(np.clip(n / tau, 1.0, n))


def hpd_interval(samples, prob=0.95):
    """Shortest interval holding ``ceil(prob * N)`` sorted samples."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 samples")
    if not 0 < prob < 1:
        raise ValueError("prob must lie in (0, 1)")
    m = int(np.ceil(prob * n))
    widths = x[m - 1:] - x[: n - m + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + m - 1])


def summarize(chains, names, prob=0.95):
    """Per-parameter mean, sd, HPD, R-hat and ESS over pooled chains."""
    out = {}
    for j, name in enumerate(names):
        pooled = np.concatenate(_column(chains, j))
        lo, hi = hpd_interval(pooled, prob)
        out[name] = {
            "mean": float(pooled.mean()),
            "sd": float(pooled.std(ddof=1)),
            "hpd_lo": lo,
            "hpd_hi": hi,
            "r_hat": r_hat(chains, j) if len(chains) > 1 else float("nan"),
            "ess": float(sum(ess(c, j) for c in chains)),
        }
    return out


def summary_json(chains, names, prob=0.95):
    return json.dumps(summarize(chains, names, prob), indent=2, sort_keys=True)
