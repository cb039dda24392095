"""Perturbed Pareto (two-component Pareto mixture) fit to relative excesses.

Survival on ``w >= 1``::

    S(w) = (1 - c) * w**(-1/gamma) + c * w**(-(1/gamma + tau))

with ``gamma > 0``, ``tau > 0`` and ``-1/tau < c < 1``. The density at 1 is
``1/gamma + c*tau``, so for ``gamma > 1`` part of that set has a negative
density; the log-likelihood is ``-inf`` there. The maximum likelihood
``gamma`` is the PPD estimate of the extreme value index.

The optimizer works on ``theta = (log gamma, log tau, theta_c)`` where
``c = -1/tau + (1 + 1/tau) * sigmoid(theta_c)``, so every iterate satisfies the
constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from .windowing import LocalSample

TIE_NUDGE = 1e-12
DEFAULT_C_STARTS = (-0.1, 0.1, 0.5)
REL_TOL = 1e-8
MAX_ITER = 500


@dataclass(frozen=True)
class PpdParams:
    gamma: float
    c: float
    tau: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.tau > 0):
            raise ValueError(f"gamma and tau must be positive, got {self}")
        if not (-1.0 / self.tau < self.c < 1.0):
            raise ValueError(f"c must lie in (-1/tau, 1) = ({-1.0 / self.tau}, 1), got {self.c}")

    def survival(self, w):
        w = np.asarray(w, dtype=float)
        a = 1.0 / self.gamma
        return (1.0 - self.c) * w ** (-a) + self.c * w ** (-(a + self.tau))

    def density(self, w):
        w = np.asarray(w, dtype=float)
        a = 1.0 / self.gamma
        return (1.0 - self.c) * a * w ** (-a - 1.0) + self.c * (a + self.tau) * w ** (
            -a - self.tau - 1.0
        )

    def to_theta(self) -> np.ndarray:
        frac = (self.c + 1.0 / self.tau) / (1.0 + 1.0 / self.tau)
        return np.array([math.log(self.gamma), math.log(self.tau), float(logit(frac))])

    @classmethod
    def from_theta(cls, theta) -> "PpdParams":
        gamma, tau, c = _unpack(theta)
        return cls(gamma, c, tau)


@dataclass(frozen=True)
class FitResult:
    params: PpdParams
    loglik: float
    converged: bool
    iterations: int
    start: PpdParams


def _unpack(theta):
    # clipping keeps c strictly inside (-1/tau, 1) in floating point
    gamma = math.exp(min(max(theta[0], -30.0), 30.0))
    tau = math.exp(min(max(theta[1], -30.0), 30.0))
    c = -1.0 / tau + (1.0 + 1.0 / tau) * float(expit(min(max(theta[2], -30.0), 30.0)))
    return gamma, tau, c


def _prepare(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("excesses must be a nonempty 1-d sequence")
    if np.any(~np.isfinite(v)) or np.any(v < 1.0):
        raise ValueError("relative excesses must be finite and >= 1")
    return np.where(v == 1.0, 1.0 + TIE_NUDGE, v)


def relative_excesses(s: LocalSample, k: int) -> np.ndarray:
    """``W_{m-j+1} / W_{m-k}`` for ``j = 1..k`` (largest first)."""
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= s.m - 1):
        raise ValueError(f"k must be an integer in [1, {s.m - 1}], got {k}")
    return s.w[s.m - k :][::-1] / s.w[s.m - k - 1]


def _loglik_logs(gamma: float, c: float, tau: float, log_v: np.ndarray, sum_log_v: float) -> float:
    a = 1.0 / gamma
    inner = (1.0 - c) * a + c * (a + tau) * np.exp(-tau * log_v)
    if np.any(inner <= 0.0):
        return -math.inf
    return float(-(a + 1.0) * sum_log_v + np.sum(np.log(inner)))


def ppd_loglik(params: PpdParams, v) -> float:
    """Log-likelihood of the excesses; ``-inf`` when the density is not positive."""
    if not isinstance(params, PpdParams):
        raise TypeError("params must be PpdParams")
    v = _prepare(v)
    log_v = np.log(v)
    return _loglik_logs(params.gamma, params.c, params.tau, log_v, float(log_v.sum()))


def fit_ppd(
    v,
    start: PpdParams | None = None,
    *,
    fix_c: float | None = None,
    fix_tau: float | None = None,
    c_starts=DEFAULT_C_STARTS,
    rel_tol: float = REL_TOL,
    max_iter: int = MAX_ITER,
) -> FitResult:
    """Constrained maximum likelihood fit by multi-start Nelder-Mead.

    Starts from ``gamma = mean(log v)`` (the Pareto MLE), ``tau = 1`` and each
    ``c`` in ``c_starts``, plus ``start`` when given. ``fix_c`` / ``fix_tau``
    hold that parameter constant.
    """
    v = _prepare(v)
    if v.size < 3:
        raise ValueError("need at least 3 excesses")
    log_v = np.log(v)
    sum_log_v = float(log_v.sum())
    hill0 = max(sum_log_v / v.size, 1e-8)
    tau0 = 1.0 if fix_tau is None else float(fix_tau)
    if fix_tau is not None and not fix_tau > 0:
        raise ValueError("fix_tau must be positive")
    if fix_c is not None and not -1.0 / tau0 < fix_c < 1.0:
        raise ValueError("fix_c must lie in (-1/tau, 1)")

    free = [True, fix_tau is None, fix_c is None]

    def full_theta(sub):
        theta = np.empty(3)
        it = iter(sub)
        theta[0] = next(it)
        theta[1] = next(it) if free[1] else math.log(tau0)
        if free[2]:
            theta[2] = next(it)
        return theta

    def params_of(sub):
        theta = full_theta(sub)
        gamma, tau, c = _unpack(theta)
        if not free[2]:
            c = float(fix_c)
        return gamma, tau, c

    def objective(sub):
        gamma, tau, c = params_of(sub)
        if not (np.isfinite(gamma) and np.isfinite(tau)) or gamma <= 0 or tau <= 0:
            return math.inf
        ll = _loglik_logs(gamma, c, tau, log_v, sum_log_v)
        return -ll if np.isfinite(ll) else math.inf

    def sub_of(p: PpdParams):
        theta = p.to_theta()
        return np.array([theta[i] for i in range(3) if free[i]])

    starts = []
    if free[2]:
        for c0 in c_starts:
            if -1.0 / tau0 < c0 < 1.0:
                starts.append(PpdParams(hill0, float(c0), tau0))
    else:
        starts.append(PpdParams(hill0, float(fix_c), tau0))
    if start is not None:
        starts.insert(0, start if free[2] else PpdParams(start.gamma, float(fix_c), start.tau))

    pareto_point = None
    if -1.0 / tau0 < 0.0 and (free[2] or fix_c == 0.0):
        pareto_point = PpdParams(hill0, 0.0 if free[2] else float(fix_c), tau0)

    best = None
    for p0 in starts:
        x0 = sub_of(p0)
        f0 = objective(x0)
        simplex = np.vstack([x0, x0 + 0.5 * np.eye(len(x0))])
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": math.inf,
                "fatol": rel_tol * max(1.0, abs(f0)) if np.isfinite(f0) else rel_tol,
                "maxiter": max_iter,
                "maxfev": 4 * max_iter,
            },
        )
        x, f, ok = res.x, res.fun, bool(res.success)
        if not f <= f0:
            x, f = x0, f0
        cand = (f, x, ok, int(res.nit), p0)
        if best is None or cand[0] < best[0]:
            best = cand

    f, x, ok, nit, p0 = best
    gamma, tau, c = params_of(x)
    params = PpdParams(gamma, c, tau)
    if pareto_point is not None:
        ll_pareto = ppd_loglik(pareto_point, v)
        if ll_pareto > -f:
            params, f = pareto_point, -ll_pareto
    return FitResult(
        params=params, loglik=float(-f), converged=bool(ok and np.isfinite(f)), iterations=nit, start=p0
    )


def ppd_estimate(s: LocalSample, k: int, **fit_options) -> float | None:
    """Raw PPD estimate of the EVI at ``k``; ``None`` if the fit fails."""
    if k < 3:
        return None
    try:
        result = fit_ppd(relative_excesses(s, k), **fit_options)
    except ValueError:
        return None
    return result.params.gamma if result.converged else None
