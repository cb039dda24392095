"""Covariate-dependent heavy-tailed lifetimes with random right censoring.

Lifetimes ``Y`` and censoring times ``C`` are drawn by inverse transform from
one of three families (Burr, Pareto, Frechet) whose extreme value index is a
log-linear function of a scalar covariate ``x ~ Uniform(0, 1)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class Family(str, Enum):
    BURR = "Burr"
    PARETO = "Pareto"
    FRECHET = "Frechet"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        for member in cls:
            if member.value.lower() == str(value).lower():
                return member
        raise ValueError(f"unknown family {value!r}; expected one of {[f.value for f in cls]}")


DEFAULT_BETA0 = -0.11
DEFAULT_BETA1 = -2.90


@dataclass(frozen=True)
class CovariateModel:
    """Log-linear EVI function ``gamma1(x) = exp(beta0 + beta1 * x)``.

    ``scale_eta`` and ``burr_tau`` are the fixed Burr scale and first shape;
    the second Burr shape is ``lambda(x) = 1 / (burr_tau * gamma(x))``.
    """

    family: Family = Family.BURR
    beta0: float = DEFAULT_BETA0
    beta1: float = DEFAULT_BETA1
    scale_eta: float = 1.0
    burr_tau: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.family is Family.BURR and not (self.scale_eta > 0 and self.burr_tau > 0):
            raise ValueError("Burr requires scale_eta > 0 and burr_tau > 0")


@dataclass(frozen=True)
class CensoringScheme:
    """Censoring chosen so a fraction ``p_noncensored`` of the tail is observed.

    ``p_noncensored == 1`` is the no-censoring toggle (``C`` is infinite).
    ``family=None`` means the censoring variable shares the lifetime family.
    """

    p_noncensored: float
    family: Family | None = None

    def __post_init__(self):
        if not 0.0 < self.p_noncensored <= 1.0:
            raise ValueError(f"p_noncensored must lie in (0, 1], got {self.p_noncensored}")
        if self.family is not None:
            object.__setattr__(self, "family", Family.parse(self.family))

    @property
    def uncensored(self) -> bool:
        return self.p_noncensored == 1.0


@dataclass(frozen=True)
class Triplet:
    z: float
    delta: int
    x: tuple[float, ...]


@dataclass(frozen=True)
class Dataset:
    """Observed ``(z, delta, x)`` records stored column-wise.

    ``x`` has shape ``(n, d)``. Arrays are read-only.
    """

    z: np.ndarray
    delta: np.ndarray
    x: np.ndarray
    n: int = field(init=False)
    d: int = field(init=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        delta = np.asarray(self.delta, dtype=np.int8)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if not (len(z) == len(delta) == len(x)):
            raise ValueError("z, delta and x must have equal length")
        if np.any(z <= 0):
            raise ValueError("observed values z must be positive")
        if np.any((delta != 0) & (delta != 1)):
            raise ValueError("delta must be 0 or 1")
        for name, arr in (("z", z), ("delta", delta), ("x", x)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n", len(z))
        object.__setattr__(self, "d", x.shape[1])

    @property
    def records(self) -> list[Triplet]:
        return [
            Triplet(float(z), int(dl), tuple(float(v) for v in xi))
            for z, dl, xi in zip(self.z, self.delta, self.x)
        ]

    @classmethod
    def from_records(cls, records) -> "Dataset":
        records = list(records)
        return cls(
            z=[r.z for r in records],
            delta=[r.delta for r in records],
            x=np.array([r.x for r in records], dtype=float).reshape(len(records), -1),
        )

    def to_csv(self, path: str | Path) -> None:
        """Write columns ``z,delta,x`` (``x1..xd`` when ``d > 1``)."""
        xcols = ["x"] if self.d == 1 else [f"x{i + 1}" for i in range(self.d)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["z", "delta", *xcols])
            for z, dl, xi in zip(self.z, self.delta, self.x):
                writer.writerow([repr(float(z)), int(dl), *(repr(float(v)) for v in xi)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            if "z" not in header or "delta" not in header:
                raise ValueError(f"{path}: header must contain z,delta,x")
            xcols = ["x"] if "x" in header else sorted(
                (c for c in header if c.startswith("x")), key=lambda c: int(c[1:])
            )
            if not xcols:
                raise ValueError(f"{path}: no covariate column")
            rows = list(reader)
        return cls(
            z=[float(r["z"]) for r in rows],
            delta=[int(r["delta"]) for r in rows],
            x=[[float(r[c]) for c in xcols] for r in rows],
        )


def gamma1_of(model: CovariateModel, x):
    return np.exp(model.beta0 + model.beta1 * np.asarray(x, dtype=float))


def gamma2_of(scheme: CensoringScheme, gamma1):
    """EVI of the censoring variable giving tail noncensoring fraction ``p``."""
    p = scheme.p_noncensored
    if not 0.0 < p < 1.0:
        raise ValueError(f"p_noncensored must lie in (0, 1) to define gamma2, got {p}")
    return np.asarray(gamma1, dtype=float) * p / (1.0 - p)


def quantile(family, gamma, u, *, eta: float = 1.0, tau: float = 2.0, lam=None):
    """Inverse CDF of ``family`` at ``u`` for extreme value index ``gamma``.

    For Burr the second shape defaults to ``lam = 1 / (tau * gamma)``.
    """
    family = Family.parse(family)
    u = np.asarray(u, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("u must lie strictly inside (0, 1)")
    if np.any(gamma <= 0):
        raise ValueError("gamma must be positive")
    if family is Family.BURR:
        lam = 1.0 / (tau * gamma) if lam is None else np.asarray(lam, dtype=float)
        # v**(-1/lam) - 1 == expm1(-log(v)/lam); stays accurate for u near 0
        return (eta * np.expm1(-np.log1p(-u) / lam)) ** (1.0 / tau)
    if family is Family.PARETO:
        return (1.0 - u) ** (-gamma)
    return (-np.log(u)) ** (-gamma)


def cdf(family, gamma, y, *, eta: float = 1.0, tau: float = 2.0, lam=None):
    family = Family.parse(family)
    y = np.asarray(y, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if family is Family.BURR:
        lam = 1.0 / (tau * gamma) if lam is None else np.asarray(lam, dtype=float)
        return -np.expm1(-lam * np.log1p(y**tau / eta))
    if family is Family.PARETO:
        return np.where(y < 1.0, 0.0, 1.0 - y ** (-1.0 / gamma))
    return np.exp(-(y ** (-1.0 / gamma)))


def _draw(family: Family, model: CovariateModel, gamma, rng: np.random.Generator):
    # one uniform per variate; 1 - random() lies in (0, 1]
    u = 1.0 - rng.random(np.shape(gamma))
    u = np.where(u >= 1.0, np.nextafter(1.0, 0.0), u)
    return quantile(family, gamma, u, eta=model.scale_eta, tau=model.burr_tau)


def sample_dataset(model: CovariateModel, scheme: CensoringScheme, n: int, seed: int) -> Dataset:
    """Draw ``n`` triplets: uniform covariates, ``Y`` and ``C`` on separate streams."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x_stream, y_stream, c_stream = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    x = x_stream.random(n)
    g1 = gamma1_of(model, x)
    y = _draw(model.family, model, g1, y_stream)
    if scheme.uncensored:
        c = np.full(n, np.inf)
    else:
        g2 = gamma2_of(scheme, g1)
        c = _draw(scheme.family or model.family, model, g2, c_stream)
    z = np.minimum(y, c)
    delta = (y <= c).astype(np.int8)
    return Dataset(z=z, delta=delta, x=x[:, None])
