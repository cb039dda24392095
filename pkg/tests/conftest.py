import numpy as np
import pytest

from censored_evi.windowing import LocalSample


def _censored_pareto(gamma1, m, seed, p=None):
    """Strict Pareto lifetimes, censored by a Pareto with gamma2 = gamma1*p/(1-p)."""
    rng = np.random.default_rng(seed)
    y = (1.0 - rng.random(m)) ** -gamma1
    if p is None:
        return LocalSample.from_values(y)
    c = (1.0 - rng.random(m)) ** -(gamma1 * p / (1.0 - p))
    return LocalSample.from_values(np.minimum(y, c), (y <= c).astype(int))


@pytest.fixture
def geometric():
    """W_j = e^j, j = 1..10."""
    return LocalSample.from_values(np.exp(np.arange(1, 11)))


@pytest.fixture
def censored_pareto():
    return _censored_pareto
