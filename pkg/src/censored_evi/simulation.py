"""Replicated simulation study: bias and MSE of each estimator against ``k``."""

from __future__ import annotations

import hashlib
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from typing import Callable, Optional, Sequence

from .estimators import ALL_KINDS, EstimateSeries, EstimatorKind, estimate_all
from .sampling import (
    DEFAULT_BETA0,
    DEFAULT_BETA1,
    CensoringScheme,
    CovariateModel,
    Family,
    gamma1_of,
    sample_dataset,
)
from .windowing import Window, select_window

MIN_WINDOW = 6
MIN_K = 5
# rough single-core costs used only for the runtime warning
_SECONDS_PER_PPD_FIT = 0.025
_SECONDS_PER_CLOSED_FORM = 2e-5


def default_k_grid(n: int, h: float, step: int = 5) -> tuple[int, ...]:
    """Every ``step``-th ``k`` from 5 up to 90% of the expected window size ``2hn``."""
    k_max = max(MIN_K, int(0.9 * min(1.0, 2.0 * h) * n))
    return tuple(range(MIN_K, k_max + 1, step))


@dataclass(frozen=True)
class StudyConfig:
    """Design of a simulation study.

    The full profile is ``n=2000, R=1000``; the desk default uses
    ``R=100``. ``p_levels`` are noncensored tail fractions (0.90, 0.65, 0.45
    give 10%, 35% and 55% censoring). ``k_grid=None`` resolves to
    :func:`default_k_grid`.
    """

    family: tuple[Family, ...] = (Family.BURR,)
    beta0: float = DEFAULT_BETA0
    beta1: float = DEFAULT_BETA1
    x_stars: tuple[float, ...] = (0.12, 0.37, 0.75)
    p_levels: tuple[float, ...] = (0.90, 0.65, 0.45)
    n: int = 2000
    R: int = 100
    h: float = 0.05
    k_grid: Optional[tuple[int, ...]] = None
    kinds: tuple[EstimatorKind, ...] = ALL_KINDS
    master_seed: int = 20190101
    censoring_family: Optional[Family] = None
    ww_kl_spacing_form: bool = False
    ppd_fix_tau: Optional[float] = None

    def __post_init__(self):
        fam = self.family
        fam = (fam,) if isinstance(fam, (str, Family)) else tuple(fam)
        object.__setattr__(self, "family", tuple(Family.parse(f) for f in fam))
        object.__setattr__(self, "x_stars", tuple(float(x) for x in self.x_stars))
        object.__setattr__(self, "p_levels", tuple(float(p) for p in self.p_levels))
        object.__setattr__(self, "kinds", tuple(EstimatorKind.parse(k) for k in self.kinds))
        if self.censoring_family is not None:
            object.__setattr__(self, "censoring_family", Family.parse(self.censoring_family))
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(errors))
        if self.k_grid is None:
            object.__setattr__(self, "k_grid", default_k_grid(self.n, self.h))
        else:
            object.__setattr__(self, "k_grid", tuple(sorted(set(int(k) for k in self.k_grid))))

    def validate(self) -> list[str]:
        """Invariant violations as ``key: message`` strings."""
        errors = []
        if not self.family:
            errors.append("family: at least one family required")
        if not (isinstance(self.n, int) and self.n >= 1):
            errors.append(f"n: must be an integer >= 1, got {self.n!r}")
        if not (isinstance(self.R, int) and self.R >= 1):
            errors.append(f"R: must be an integer >= 1, got {self.R!r}")
        if not (isinstance(self.h, (int, float)) and self.h > 0):
            errors.append(f"h: must be positive, got {self.h!r}")
        if not self.x_stars or any(not 0.0 <= x <= 1.0 for x in self.x_stars):
            errors.append(f"x_stars: values must lie in [0, 1], got {list(self.x_stars)}")
        if not self.p_levels or any(not 0.0 < p < 1.0 for p in self.p_levels):
            errors.append(f"p_levels: values must lie in (0, 1), got {list(self.p_levels)}")
        if not self.kinds:
            errors.append("kinds: at least one estimator required")
        if self.k_grid is not None and (
            not len(self.k_grid) or any(int(k) < 1 for k in self.k_grid)
        ):
            errors.append(f"k_grid: must be nonempty positive counts, got {self.k_grid!r}")
        if self.ppd_fix_tau is not None and not self.ppd_fix_tau > 0:
            errors.append(f"ppd_fix_tau: must be positive, got {self.ppd_fix_tau!r}")
        return errors

    @property
    def ppd_options(self) -> dict:
        return {} if self.ppd_fix_tau is None else {"fix_tau": self.ppd_fix_tau}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = [f.value for f in self.family]
        d["kinds"] = [k.value for k in self.kinds]
        d["x_stars"] = list(self.x_stars)
        d["p_levels"] = list(self.p_levels)
        d["k_grid"] = list(self.k_grid)
        d["censoring_family"] = self.censoring_family.value if self.censoring_family else None
        return d

    def estimated_seconds(self) -> float:
        cells = len(self.family) * len(self.x_stars) * len(self.p_levels) * self.R
        n_ppd = sum(k is EstimatorKind.PPD for k in self.kinds)
        per_k = n_ppd * _SECONDS_PER_PPD_FIT + len(self.kinds) * _SECONDS_PER_CLOSED_FORM
        return cells * (len(self.k_grid) * per_k + 2e-6 * self.n)


@dataclass(frozen=True)
class ReplicationResult:
    seed: int
    m: int
    series: tuple[EstimateSeries, ...]
    sparse: bool = False


@dataclass(frozen=True)
class PerformanceRow:
    family: str
    x_star: float
    gamma_true: float
    p_censor: float
    estimator: str
    k: int
    median_bias: float
    mse: float
    n_valid: int
    n_missing: int

    @property
    def unreliable(self) -> bool:
        return 2 * self.n_valid < self.n_valid + self.n_missing

    def sort_key(self):
        return (self.family, self.x_star, self.p_censor, self.estimator, self.k)


@dataclass
class PerformanceTable:
    rows: list[PerformanceRow] = field(default_factory=list)
    replications: dict = field(default_factory=dict)

    def sorted_rows(self) -> list[PerformanceRow]:
        return sorted(self.rows, key=PerformanceRow.sort_key)


def censoring_fraction(p: float) -> float:
    """Censored tail fraction ``1 - p``, rounded so 0.9 maps to exactly 0.1."""
    return round(1.0 - p, 12)


def replication_seed(master_seed: int, family, x_star: float, p: float, index: int) -> int:
    """Stable 63-bit seed for one replication of one design cell."""
    fam = Family.parse(family).value
    key = f"{int(master_seed)}|{fam}|{float(x_star)!r}|{float(p)!r}|{int(index)}"
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def _missing_series(kind, k_grid) -> EstimateSeries:
    none = (None,) * len(k_grid)
    return EstimateSeries(kind=kind, k_values=tuple(k_grid), estimates=none, phat=none)


def _pad(series: EstimateSeries, k_grid) -> EstimateSeries:
    lookup = {k: i for i, k in enumerate(series.k_values)}

    def take(values, default):
        return tuple(values[lookup[k]] if k in lookup else default for k in k_grid)

    return EstimateSeries(
        kind=series.kind,
        k_values=tuple(k_grid),
        estimates=take(series.estimates, None),
        phat=take(series.phat, None),
        raw=take(series.raw, None),
        degenerate=take(series.degenerate, False),
    )


def run_replication(
    config: StudyConfig, x_star: float, p: float, seed: int, family=None
) -> ReplicationResult:
    """Sample, window around ``x_star`` and estimate at every usable ``k``.

    ``p = 1`` switches censoring off. Windows with fewer than 6 points give an
    all-missing result flagged ``sparse``.
    """
    family = config.family[0] if family is None else Family.parse(family)
    model = CovariateModel(family=family, beta0=config.beta0, beta1=config.beta1)
    scheme = CensoringScheme(p_noncensored=p, family=config.censoring_family)
    data = sample_dataset(model, scheme, config.n, seed)
    s = select_window(data, Window((x_star,), config.h))
    usable = [k for k in config.k_grid if MIN_K <= k <= s.m - 1]
    if s.m < MIN_WINDOW or not usable:
        series = tuple(_missing_series(kind, config.k_grid) for kind in config.kinds)
        return ReplicationResult(seed=seed, m=s.m, series=series, sparse=True)
    found = estimate_all(
        s,
        config.kinds,
        usable,
        ww_kl_spacing_form=config.ww_kl_spacing_form,
        ppd_options=config.ppd_options,
    )
    return ReplicationResult(
        seed=seed, m=s.m, series=tuple(_pad(sr, config.k_grid) for sr in found)
    )


def summarize(values: Sequence[Optional[float]], truth: float) -> tuple[float, float, int, int]:
    """Median bias, MSE over defined values, and the valid / missing counts."""
    valid = [v for v in values if v is not None and math.isfinite(v)]
    n_missing = len(values) - len(valid)
    if not valid:
        return math.nan, math.nan, 0, n_missing
    bias = statistics.median(valid) - truth
    mse = math.fsum((v - truth) ** 2 for v in valid) / len(valid)
    return bias, mse, len(valid), n_missing


def aggregate_cell(
    results: Sequence[ReplicationResult],
    *,
    family,
    x_star: float,
    p: float,
    truth: float,
) -> list[PerformanceRow]:
    """Rows for one design cell; ``(kind, k)`` pairs with no valid value are dropped."""
    rows = []
    if not results:
        return rows
    for idx, first in enumerate(results[0].series):
        for pos, k in enumerate(first.k_values):
            values = [r.series[idx].estimates[pos] for r in results]
            bias, mse, n_valid, n_missing = summarize(values, truth)
            if n_valid == 0:
                continue
            rows.append(
                PerformanceRow(
                    family=Family.parse(family).value,
                    x_star=float(x_star),
                    gamma_true=float(truth),
                    p_censor=censoring_fraction(p),
                    estimator=first.kind.value,
                    k=int(k),
                    median_bias=bias,
                    mse=mse,
                    n_valid=n_valid,
                    n_missing=n_missing,
                )
            )
    return rows


def _call(replicate, config, task):
    family, x_star, p, seed = task
    return replicate(config, x_star, p, seed, family=family)


def run_study(
    config: StudyConfig,
    *,
    workers: int = 1,
    replicate: Callable[..., ReplicationResult] = run_replication,
    keep_replications: bool = False,
    progress: Callable[[int, int], None] | None = None,
) -> PerformanceTable:
    """Run ``R`` replications for every (family, x*, p) cell and aggregate.

    Replications may run in ``workers`` processes; results are consumed in
    replication order so the table does not depend on scheduling.
    """
    cells = [
        (fam, x, p) for fam in config.family for x in config.x_stars for p in config.p_levels
    ]
    tasks = [
        (fam, x, p, replication_seed(config.master_seed, fam, x, p, r))
        for fam, x, p in cells
        for r in range(config.R)
    ]
    fn = partial(_call, replicate, config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (8 * workers))
            results = list(_tracked(pool.map(fn, tasks, chunksize=chunk), len(tasks), progress))
    else:
        results = list(_tracked(map(fn, tasks), len(tasks), progress))

    table = PerformanceTable()
    model = CovariateModel(beta0=config.beta0, beta1=config.beta1)
    for i, (fam, x, p) in enumerate(cells):
        cell_results = results[i * config.R : (i + 1) * config.R]
        truth = float(gamma1_of(model, x))
        table.rows.extend(aggregate_cell(cell_results, family=fam, x_star=x, p=p, truth=truth))
        if keep_replications:
            table.replications[(fam.value, x, p)] = cell_results
    table.rows = table.sorted_rows()
    return table


def _tracked(iterable, total, progress):
    for i, item in enumerate(iterable, 1):
        if progress is not None:
            progress(i, total)
        yield item


def with_overrides(config: StudyConfig, **overrides) -> StudyConfig:
    """Copy of ``config`` with the non-``None`` keys replaced.

    A default ``k`` grid follows changes to ``n`` or ``h``.
    """
    overrides = {k: v for k, v in overrides.items() if v is not None}
    resized = {"n", "h"} & overrides.keys()
    if resized and "k_grid" not in overrides and config.k_grid == default_k_grid(config.n, config.h):
        overrides["k_grid"] = None
    return replace(config, **overrides)
