"""Closed-form conditional EVI estimators on a window sample.

Every estimator takes a :class:`~censored_evi.windowing.LocalSample` ``s`` and
the number ``k`` of top order statistics, ``1 <= k <= s.m - 1``. ``W_j``
below is ``s.w[j - 1]`` (ascending, 1-based) and ``m = s.m``.

Undefined values (zero denominators) are returned as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .windowing import LocalSample


class EstimatorKind(str, Enum):
    HILL = "Hill"
    MOM = "MOM"
    GH = "GH"
    ZIPF = "Zipf"
    MOMR = "MomR"
    PMOM = "PMom"
    PPD = "PPD"
    WW_KM = "WW.KM"
    WW_KL = "WW.KL"

    @classmethod
    def parse(cls, value) -> "EstimatorKind":
        if isinstance(value, EstimatorKind):
            return value
        key = str(value).replace("_", ".").lower()
        for member in cls:
            if member.value.lower() == key or member.name.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown estimator {value!r}; expected one of {[e.value for e in cls]}")


ALL_KINDS = tuple(EstimatorKind)
CLOSED_FORM_KINDS = tuple(k for k in EstimatorKind if k is not EstimatorKind.PPD)
# divided by the noncensored top-k proportion; WW.* handle censoring through Kaplan-Meier
ADAPTED_KINDS = frozenset(
    {
        EstimatorKind.HILL,
        EstimatorKind.MOM,
        EstimatorKind.GH,
        EstimatorKind.ZIPF,
        EstimatorKind.MOMR,
        EstimatorKind.PMOM,
        EstimatorKind.PPD,
    }
)


@dataclass(frozen=True)
class EstimateSeries:
    """Estimates of one kind across a grid of ``k``.

    ``estimates`` holds the censoring-adapted value (or the raw WW value) and
    ``raw`` the unadapted one; ``None`` marks an undefined estimate.
    ``degenerate`` flags WW estimates that dropped zero-denominator terms or
    had every top-``k`` observation censored.
    """

    kind: EstimatorKind
    k_values: tuple[int, ...]
    estimates: tuple[Optional[float], ...]
    phat: tuple[Optional[float], ...]
    raw: tuple[Optional[float], ...] = ()
    degenerate: tuple[bool, ...] = ()

    def __post_init__(self):
        n = len(self.k_values)
        if len(self.estimates) != n or len(self.phat) != n:
            raise ValueError("k_values, estimates and phat must have equal lengths")
        if list(self.k_values) != sorted(self.k_values):
            raise ValueError("k_values must be ascending")
        if not self.raw:
            object.__setattr__(self, "raw", tuple(self.estimates))
        if not self.degenerate:
            object.__setattr__(self, "degenerate", (False,) * n)

    @property
    def n_missing(self) -> int:
        return sum(v is None for v in self.estimates)


def _check_k(s: LocalSample, k: int, *, upper: int | None = None) -> None:
    upper = s.m - 1 if upper is None else upper
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= upper):
        raise ValueError(f"k must be an integer in [1, {upper}] for a sample of size {s.m}, got {k}")


def _defined(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


def hill(s: LocalSample, k: int) -> float:
    """Hill estimator in the weighted-spacing form."""
    _check_k(s, k)
    top = s.log_w[s.m - k - 1 :][::-1]  # log W_{m}, ..., log W_{m-k}
    i = np.arange(1, k + 1)
    return float(np.sum(i * (top[:-1] - top[1:])) / k)


def log_moment(s: LocalSample, k: int, j: int) -> float:
    """Mean of the ``j``-th power of log excesses over ``W_{m-k}``."""
    _check_k(s, k)
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    excess = s.log_w[s.m - k :] - s.log_w[s.m - k - 1]
    return float(np.mean(excess**j))


def _moments(s: LocalSample, k: int) -> tuple[float, float, float]:
    """``M1``, ``M2`` and the centred variance ``M2 - M1**2`` of the log excesses."""
    # log of ratios keeps the rounding of log(scale) out of near-tied excesses
    excess = np.log(s.w[s.m - k :] / s.w[s.m - k - 1])
    m1 = float(np.mean(excess))
    return m1, float(np.mean(excess * excess)), float(np.mean((excess - m1) ** 2))


def _moment_from(m1: float, m2: float, var: float) -> Optional[float]:
    # 1 - M1^2/M2 = var/M2; the centred variance avoids cancellation near ties
    if m2 == 0.0 or var == 0.0:
        return None
    return m1 + 1.0 - 0.5 * m2 / var


def moment(s: LocalSample, k: int) -> Optional[float]:
    _check_k(s, k)
    return _moment_from(*_moments(s, k))


def gh(s: LocalSample, k: int) -> Optional[float]:
    """Generalised Hill: slope of the ultimately linear part of the UH plot.

    Needs ``k <= m - 2``. Undefined when any ``UH_j`` is not positive.
    """
    _check_k(s, k, upper=s.m - 2)
    # desc[i] = log W_{m-i}, shifted so the scale drops out before summing
    desc = s.log_w[::-1][: k + 2] - s.log_w[s.m - k - 2]
    j = np.arange(1, k + 2)
    cum = np.cumsum(desc[: k + 1])  # sum_{i=1..j} log W_{m-i+1}
    hills = cum / j - desc[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_uh = desc[j] + np.log(hills)
    if not np.all(np.isfinite(log_uh)):
        return None
    return float(np.mean(log_uh[:k]) - log_uh[k])


def zipf(s: LocalSample, k: int) -> Optional[float]:
    _check_k(s, k)
    if k == 1:
        return None
    top = s.log_w[s.m - k - 1 :][::-1]
    i = np.arange(1, k + 1)
    weights = np.log(k / i)
    return float(np.sum(i * (top[:-1] - top[1:]) * weights) / np.sum(weights))


def momr(s: LocalSample, k: int) -> Optional[float]:
    _check_k(s, k)
    m1, m2, _ = _moments(s, k)
    if m1 == 0.0:
        return None
    return 0.5 * m2 / m1


def pmom(s: LocalSample, k: int) -> Optional[float]:
    _check_k(s, k)
    m1, m2, var = _moments(s, k)
    base = _moment_from(m1, m2, var)
    if base is None or m1 == 0.0:
        return None
    return 0.5 * m2 / m1 + base - m1


def phat(s: LocalSample, k: int) -> float:
    """Fraction of noncensored observations among the top ``k``."""
    _check_k(s, k)
    return float(np.mean(s.flags[s.m - k :]))


def adapt(raw: Optional[float], phat: float) -> Optional[float]:
    if not 0.0 <= phat <= 1.0:
        raise ValueError(f"phat must lie in [0, 1], got {phat}")
    if raw is None or phat == 0.0:
        return None
    return raw / phat


class KaplanMeier:
    """Product-limit survival estimates of ``F`` (events) and ``G`` (censorings).

    Built once per sample; cumulative products are indexed by the number of
    ordered observations included.
    """

    def __init__(self, s: LocalSample):
        m = s.m
        j = np.arange(1, m + 1)
        factor = (m - j) / (m - j + 1.0)
        d = s.flags.astype(bool)
        surv_f = np.cumprod(np.where(d, factor, 1.0))
        surv_g = np.cumprod(np.where(d, 1.0, factor))
        self._w = s.w
        self._f = np.concatenate(([1.0], surv_f))
        self._g = np.concatenate(([1.0], surv_g))
        self._f.setflags(write=False)
        self._g.setflags(write=False)

    def _table(self, which: str) -> np.ndarray:
        if which == "F":
            return self._f
        if which == "G":
            return self._g
        raise ValueError("which must be 'F' or 'G'")

    def survival(self, b, which: str = "F"):
        """``1 - F_hat(b)`` (or ``1 - G_hat(b)``): product over ``W_j <= b``."""
        return self._table(which)[np.searchsorted(self._w, b, side="right")]

    def survival_left(self, b, which: str = "F"):
        """Left limit at ``b``: product over ``W_j < b``."""
        return self._table(which)[np.searchsorted(self._w, b, side="left")]

    def survival_at_index(self, count, which: str = "F"):
        """Survival after the first ``count`` ordered observations."""
        return self._table(which)[count]


def km_survival(s: LocalSample, b: float, which: str = "F") -> float:
    if s.m == 0:
        raise ValueError("empty sample")
    if not b < s.w[-1]:
        raise ValueError("b must be below the sample maximum")
    return float(s.km.survival(b, which))


def km_survival_left(s: LocalSample, b: float, which: str = "F") -> float:
    if s.m == 0:
        raise ValueError("empty sample")
    return float(s.km.survival_left(b, which))


def _ww(s: LocalSample, k: int, *, weighted: bool, spacing_form: bool = False):
    """Kaplan-Meier weighted Hill sums; returns ``(value, degenerate)``."""
    _check_k(s, k)
    km = s.km
    m = s.m
    threshold = s.w[m - k - 1]
    lead = m * km.survival(threshold, "F")
    if lead == 0.0:
        return None, True
    top_w = s.w[m - k :][::-1]  # W_{m-j+1}, j = 1..k
    top_d = s.flags[m - k :][::-1].astype(float)
    g_left = km.survival_left(top_w, "G")
    j = np.arange(1, k + 1)
    if spacing_form:
        logs = s.log_w[m - k - 1 :][::-1]
        excess = logs[:-1] - logs[1:]
    else:
        excess = s.log_w[m - k :][::-1] - s.log_w[m - k - 1]
    if weighted:
        excess = j * excess
    usable = g_left > 0.0
    degenerate = bool(not usable.all() or top_d.sum() == 0.0)
    terms = np.zeros(k)
    terms[usable] = top_d[usable] / g_left[usable] * excess[usable]
    return float(terms.sum() / lead), degenerate


def ww_km(s: LocalSample, k: int) -> Optional[float]:
    return _ww(s, k, weighted=False)[0]


def ww_kl(s: LocalSample, k: int, *, spacing_form: bool = False) -> Optional[float]:
    return _ww(s, k, weighted=True, spacing_form=spacing_form)[0]


_CLOSED_FORM = {
    EstimatorKind.HILL: hill,
    EstimatorKind.MOM: moment,
    EstimatorKind.GH: gh,
    EstimatorKind.ZIPF: zipf,
    EstimatorKind.MOMR: momr,
    EstimatorKind.PMOM: pmom,
}


def raw_estimate(kind, s: LocalSample, k: int, *, ww_kl_spacing_form: bool = False, ppd_options=None):
    """Unadapted estimate and degeneracy flag for one ``(kind, k)``."""
    kind = EstimatorKind.parse(kind)
    if kind in _CLOSED_FORM:
        if kind is EstimatorKind.GH and k > s.m - 2:
            return None, False
        return _CLOSED_FORM[kind](s, k), False
    if kind is EstimatorKind.WW_KM:
        return _ww(s, k, weighted=False)
    if kind is EstimatorKind.WW_KL:
        return _ww(s, k, weighted=True, spacing_form=ww_kl_spacing_form)
    from .ppd import ppd_estimate

    return ppd_estimate(s, k, **(ppd_options or {})), False


def estimate_all(
    s: LocalSample,
    kinds: Sequence,
    k_grid: Sequence[int],
    *,
    ww_kl_spacing_form: bool = False,
    ppd_options: dict | None = None,
) -> list[EstimateSeries]:
    """Evaluate every requested estimator at every ``k`` of ``k_grid``.

    Series come back in the order of ``kinds``; adapted kinds are divided by
    the noncensored top-``k`` proportion.
    """
    kinds = [EstimatorKind.parse(kd) for kd in kinds]
    ks = sorted(int(k) for k in k_grid)
    if not kinds or not ks:
        raise ValueError("kinds and k_grid must be nonempty")
    for k in ks:
        _check_k(s, k)
    phats = [phat(s, k) for k in ks]
    out = []
    for kind in kinds:
        raws, adapted, degenerate = [], [], []
        for k, ph in zip(ks, phats):
            value, degen = raw_estimate(
                kind, s, k, ww_kl_spacing_form=ww_kl_spacing_form, ppd_options=ppd_options
            )
            value = None if value is None else _defined(value)
            raws.append(value)
            adapted.append(adapt(value, ph) if kind in ADAPTED_KINDS else value)
            degenerate.append(degen)
        out.append(
            EstimateSeries(
                kind=kind,
                k_values=tuple(ks),
                estimates=tuple(adapted),
                phat=tuple(phats),
                raw=tuple(raws),
                degenerate=tuple(degenerate),
            )
        )
    return out
