from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from censored_evi.sampling import CensoringScheme, CovariateModel, Dataset, sample_dataset
from censored_evi.windowing import LocalSample, Window, select_window


@pytest.fixture
def data():
    return sample_dataset(CovariateModel(), CensoringScheme(0.65), 2000, 11)


def test_window_covering_design(data):
    s = select_window(data, Window((0.5,), 0.6))
    assert s.m == data.n
    assert s.phi == 1.0


def test_empty_window():
    data = Dataset(z=[1.0, 2.0, 3.0], delta=[1, 0, 1], x=[0.1, 0.2, 0.3])
    s = select_window(data, Window((0.5,), 1e-12))
    assert s.m == 0 and s.phi == 0.0
    assert s.w.shape == (0,)


def test_window_proportion_concentrates():
    phis = [
        select_window(sample_dataset(CovariateModel(), CensoringScheme(0.9), 2000, seed), Window((0.5,), 0.05)).phi
        for seed in range(100)
    ]
    assert all(0.07 <= p <= 0.13 for p in phis)


def test_sorted_and_phi(data):
    s = select_window(data, Window((0.37,), 0.05))
    assert np.all(np.diff(s.w) >= 0)
    assert len(s.flags) == s.m
    assert s.phi == s.m / data.n


def test_closed_ball_boundary():
    data = Dataset(z=[1.0, 2.0, 3.0], delta=[1, 1, 1], x=[0.25, 0.5, 0.75])
    s = select_window(data, Window((0.5,), 0.25))
    assert s.m == 3


def test_ties_put_events_first():
    data = Dataset(z=[2.0, 2.0, 1.0, 2.0], delta=[0, 1, 1, 0], x=[0.5] * 4)
    s = select_window(data, Window((0.5,), 0.1))
    assert s.w.tolist() == [1.0, 2.0, 2.0, 2.0]
    assert s.flags.tolist() == [1, 1, 0, 0]


def test_euclidean_window_in_two_dimensions():
    x = [[0.0, 0.0], [0.3, 0.4], [0.6, 0.8], [1.0, 1.0]]
    data = Dataset(z=[1.0, 2.0, 3.0, 4.0], delta=[1, 1, 0, 1], x=x)
    s = select_window(data, Window((0.0, 0.0), 0.5))
    assert s.w.tolist() == [1.0, 2.0]


def test_dimension_mismatch_rejected(data):
    with pytest.raises(ValueError):
        select_window(data, Window((0.1, 0.2), 0.1))


def test_window_requires_positive_radius():
    with pytest.raises(ValueError):
        Window((0.5,), 0.0)


def test_local_sample_is_read_only():
    s = LocalSample.from_values([3.0, 1.0, 2.0])
    assert s.w.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        s.w[0] = 5.0


dataset_strategy = st.integers(1, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.01, 100.0), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n),
    )
)


@given(dataset_strategy, st.floats(0.0, 1.0), st.floats(0.001, 0.6))
def test_flags_travel_with_values(cols, center, radius):
    z, delta, x = cols
    data = Dataset(z=z, delta=delta, x=x)
    s = select_window(data, Window((center,), radius))
    inside = [(zi, di) for zi, di, xi in zip(z, delta, x) if abs(xi - center) <= radius]
    assert Counter(zip(s.w.tolist(), s.flags.tolist())) == Counter(inside)


@given(dataset_strategy, st.floats(0.0, 1.0), st.floats(0.001, 0.5), st.floats(0.0, 0.5))
def test_window_size_monotone_in_radius(cols, center, h, extra):
    data = Dataset(*cols)
    small = select_window(data, Window((center,), h))
    large = select_window(data, Window((center,), h + extra))
    assert small.m <= large.m
