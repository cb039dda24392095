"""Quick invariant checks runnable without the test suite (``censored-evi selftest``)."""

from __future__ import annotations

import numpy as np

from . import estimators as est
from .ppd import PpdParams, fit_ppd, ppd_loglik
from .sampling import Family, cdf, quantile
from .windowing import LocalSample


def _geometric():
    return LocalSample.from_values(np.exp(np.arange(1, 11)))


def check_geometric_values():
    s = _geometric()
    expected = {
        "hill": (est.hill(s, 4), 2.5),
        "momr": (est.momr(s, 4), 1.5),
        "moment": (est.moment(s, 4), 0.5),
        "pmom": (est.pmom(s, 4), -0.5),
        "ww_kl": (est.ww_kl(s, 4), 5.0),
        "zipf": (est.zipf(s, 2), 1.0),
    }
    return all(abs(got - want) <= 1e-12 for got, want in expected.values())


def check_no_censoring_reductions(rng):
    for _ in range(50):
        s = LocalSample.from_values(rng.pareto(2.0, size=rng.integers(8, 300)) + 1.0)
        for k in range(1, s.m):
            if abs(est.ww_km(s, k) - est.hill(s, k)) > 1e-10:
                return False
        b = s.w[rng.integers(0, s.m - 1)]
        if est.km_survival(s, b, "G") != 1.0:
            return False
        if abs(est.km_survival(s, b, "F") - np.mean(s.w > b)) > 1e-12:
            return False
    return True


def check_scale_invariance(rng):
    funcs = [est.hill, est.moment, est.gh, est.zipf, est.momr, est.pmom, est.ww_km, est.ww_kl]
    for _ in range(30):
        m = int(rng.integers(10, 200))
        s = LocalSample.from_values(rng.pareto(1.5, m) + 1.0, rng.integers(0, 2, m))
        c = float(np.exp(rng.uniform(-5, 5)))
        t = LocalSample(s.w * c, s.flags)
        k = int(rng.integers(2, m - 2))
        for f in funcs:
            a, b = f(s, k), f(t, k)
            if (a is None) != (b is None) or (a is not None and abs(a - b) > 1e-12 * max(1, abs(a))):
                return False
    return True


def check_quantile_round_trip():
    u = np.linspace(0.001, 0.999, 199)
    return all(
        np.max(np.abs(cdf(f, g, quantile(f, g, u)) - u)) < 1e-12
        for f in Family
        for g in (0.1, 0.31, 0.63, 1.5)
    )


def check_ppd_dominance(rng):
    v = (1.0 - rng.random(60)) ** -0.5
    fit = fit_ppd(v)
    pareto = ppd_loglik(PpdParams(float(np.mean(np.log(v))), 0.0, 1.0), v)
    return fit.loglik >= pareto and fit.loglik >= ppd_loglik(fit.start, v)


def run(verbose: bool = True) -> bool:
    rng = np.random.default_rng(0)
    checks = [
        ("geometric-sample estimator values", check_geometric_values),
        ("no-censoring reductions", lambda: check_no_censoring_reductions(rng)),
        ("scale invariance", lambda: check_scale_invariance(rng)),
        ("quantile/CDF round trip", check_quantile_round_trip),
        ("PPD fit dominates start and Pareto point", lambda: check_ppd_dominance(rng)),
    ]
    ok = True
    for name, fn in checks:
        passed = bool(fn())
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
