import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from censored_evi.sampling import (
    CensoringScheme,
    CovariateModel,
    Dataset,
    Family,
    cdf,
    gamma1_of,
    gamma2_of,
    quantile,
    sample_dataset,
)


@pytest.mark.parametrize("x, expected", [(0.12, 0.63), (0.37, 0.31), (0.75, 0.10)])
def test_gamma1_reported_values(x, expected):
    assert float(gamma1_of(CovariateModel(), x)) == pytest.approx(expected, abs=0.005)


def test_gamma1_general_form():
    model = CovariateModel(beta0=0.2, beta1=1.5)
    assert float(gamma1_of(model, 0.4)) == pytest.approx(math.exp(0.2 + 0.6))


@pytest.mark.parametrize(
    "g1, p, expected",
    [(0.63, 0.9, 5.67), (0.5, 0.5, 0.5), (0.31, 0.45, 0.31 * 0.45 / 0.55)],
)
def test_gamma2(g1, p, expected):
    assert float(gamma2_of(CensoringScheme(p), g1)) == pytest.approx(expected, rel=1e-12)


def test_gamma2_undefined_without_censoring():
    with pytest.raises(ValueError):
        gamma2_of(CensoringScheme(1.0), 0.5)


def test_censoring_scheme_validates():
    with pytest.raises(ValueError):
        CensoringScheme(1.2)
    with pytest.raises(ValueError):
        CensoringScheme(0.0)
    assert CensoringScheme(1.0).uncensored


def test_quantile_examples():
    assert float(quantile(Family.BURR, 0.5, 0.5, eta=1.0, tau=2.0, lam=1.0)) == pytest.approx(1.0)
    assert float(quantile(Family.PARETO, 0.5, 0.75)) == pytest.approx(2.0)
    assert float(quantile(Family.FRECHET, 1.0, math.exp(-1.0))) == pytest.approx(1.0)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.5, 1.5])
def test_quantile_domain(u):
    with pytest.raises(ValueError):
        quantile(Family.PARETO, 0.5, u)


@pytest.mark.parametrize("family", list(Family))
@pytest.mark.parametrize("gamma", [0.1, 0.31, 0.63, 2.0])
def test_quantile_cdf_round_trip(family, gamma):
    u = np.linspace(0.001, 0.999, 999)
    assert np.max(np.abs(cdf(family, gamma, quantile(family, gamma, u)) - u)) < 1e-12


@given(gamma=st.floats(0.05, 3.0), u=st.floats(1e-6, 1 - 1e-6))
def test_burr_with_unit_lambda_matches_pareto_tail(gamma, u):
    # Burr(eta=1, lambda=1, tau=1/gamma) quantile is u**gamma times the Pareto one,
    # so the two agree in the upper tail
    burr = float(quantile(Family.BURR, gamma, u, eta=1.0, tau=1.0 / gamma, lam=1.0))
    pareto = float(quantile(Family.PARETO, gamma, u))
    assert burr == pytest.approx(u**gamma * pareto, rel=1e-12)


def test_burr_default_shape_has_requested_index():
    # lambda = 1/(tau*gamma): log-survival slope tends to -1/gamma
    y = np.array([1e2, 1e3])
    logs = np.log1p(-cdf(Family.BURR, 0.4, y))
    slope = (logs[1] - logs[0]) / math.log(10.0)
    assert slope == pytest.approx(-1 / 0.4, rel=1e-3)


def test_tail_noncensoring_fraction():
    model, scheme = CovariateModel(), CensoringScheme(0.9)
    fractions = []
    for seed in range(100):
        data = sample_dataset(model, scheme, 2000, seed)
        top = np.argsort(data.z, kind="stable")[-200:]
        fractions.append(data.delta[top].mean())
    fractions = np.array(fractions)
    assert 0.85 <= fractions.mean() <= 0.95
    assert np.mean((fractions >= 0.85) & (fractions <= 0.95)) >= 0.9


def test_pareto_tail_noncensoring_is_exact_in_expectation():
    # for strict Pareto Y and C, P(delta=1 | Z=z) = gamma2/(gamma1+gamma2) at every z
    model = CovariateModel(family=Family.PARETO)
    data = sample_dataset(model, CensoringScheme(0.65), 20000, 3)
    assert data.delta.mean() == pytest.approx(0.65, abs=0.015)


def test_no_censoring_toggle():
    data = sample_dataset(CovariateModel(), CensoringScheme(1.0), 500, 1)
    assert np.all(data.delta == 1)


def test_determinism(tmp_path):
    model, scheme = CovariateModel(family="Frechet"), CensoringScheme(0.45)
    a = sample_dataset(model, scheme, 300, 42)
    b = sample_dataset(model, scheme, 300, 42)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = sample_dataset(model, scheme, 300, 43)
    assert not np.array_equal(a.z, c.z)


def test_dataset_invariants_and_csv_round_trip(tmp_path):
    data = sample_dataset(CovariateModel(), CensoringScheme(0.65), 50, 5)
    assert data.n == 50 and data.d == 1
    assert np.all(data.z > 0)
    assert set(np.unique(data.delta)) <= {0, 1}
    assert np.all((data.x >= 0) & (data.x < 1))
    data.to_csv(tmp_path / "d.csv")
    back = Dataset.from_csv(tmp_path / "d.csv")
    assert np.array_equal(back.z, data.z)
    assert np.array_equal(back.delta, data.delta)
    assert np.array_equal(back.x, data.x)
    assert Dataset.from_records(data.records).z.tolist() == data.z.tolist()


def test_dataset_rejects_bad_values():
    with pytest.raises(ValueError):
        Dataset(z=[1.0, -1.0], delta=[1, 1], x=[0.1, 0.2])
    with pytest.raises(ValueError):
        Dataset(z=[1.0, 2.0], delta=[1, 2], x=[0.1, 0.2])


def test_pareto_censoring_family_option():
    model = CovariateModel(family=Family.BURR)
    data = sample_dataset(model, CensoringScheme(0.65, family="Pareto"), 200, 1)
    assert data.n == 200
