"""Moving-window conditioning on the covariate."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .sampling import Dataset


@dataclass(frozen=True)
class Window:
    center: tuple[float, ...]
    radius: float
    metric: str = "euclidean"

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", tuple(float(c) for c in center))
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.metric != "euclidean":
            raise ValueError(f"unsupported metric {self.metric!r}")


@dataclass(frozen=True, eq=False)
class LocalSample:
    """Ascending window observations with their concomitant censoring flags."""

    w: np.ndarray
    flags: np.ndarray
    phi: float = 1.0
    m: int = field(init=False)

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        flags = np.array(self.flags, dtype=np.int8)
        if w.shape != flags.shape or w.ndim != 1:
            raise ValueError("w and flags must be 1-d arrays of equal length")
        if np.any(np.diff(w) < 0):
            raise ValueError("w must be nondecreasing")
        w.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "flags", flags)
        object.__setattr__(self, "m", len(w))

    @classmethod
    def from_values(cls, values, flags=None, phi: float = 1.0) -> "LocalSample":
        """Sort arbitrary values (and flags, default all uncensored) into a sample."""
        values = np.asarray(values, dtype=float)
        flags = np.ones(len(values), dtype=np.int8) if flags is None else np.asarray(flags)
        order = _tail_order(values, flags)
        return cls(values[order], flags[order], phi)

    @cached_property
    def log_w(self) -> np.ndarray:
        return np.log(self.w)

    @cached_property
    def km(self):
        from .estimators import KaplanMeier

        return KaplanMeier(self)


def _tail_order(z, delta):
    # primary key z; at ties events (delta=1) precede censorings; lexsort is stable
    return np.lexsort((1 - np.asarray(delta, dtype=np.int64), np.asarray(z)))


def select_window(data: Dataset, window: Window) -> LocalSample:
    """Observations whose covariate lies in the closed ball around ``window.center``."""
    if data.n == 0:
        raise ValueError("dataset is empty")
    center = np.asarray(window.center, dtype=float)
    if center.shape != (data.d,):
        raise ValueError(f"window center has dimension {center.size}, data has {data.d}")
    if data.d == 1:
        dist = np.abs(data.x[:, 0] - center[0])
    else:
        dist = np.sqrt(((data.x - center) ** 2).sum(axis=1))
    inside = dist <= window.radius
    z, delta = data.z[inside], data.delta[inside]
    order = _tail_order(z, delta)
    return LocalSample(z[order], delta[order], phi=int(inside.sum()) / data.n)
