"""Combinants, the compound-Poisson recurrence and the regime trichotomy."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from boseglow.errors import DivergentMean
from boseglow.multiplicity import (CombinantSeries, Regime, auto_order,
                                   classify_regime, combinants,
                                   log_combinants, log_omegas,
                                   mean_multiplicity,
                                   multiplicity_distribution)
from boseglow.params import ModelParams, derive


@pytest.fixture
def x1(mid_density):
    return mid_density[1]


def test_c1_equals_n0(x1):
    for n0 in (0.3, 1.0, 2.0):
        series = combinants(x1, n0, 5)
        assert series.c[0] == pytest.approx(n0, rel=1e-14)


def test_c2_closed_form(x1):
    # C_2 = (n0^2/2) (1+2x)^(-3/2); frozen value at x = 1, n0 = 1
    series = combinants(x1, 1.0, 5)
    assert series.c[1] == pytest.approx(0.5 * 3.0 ** -1.5, rel=1e-13)
    assert series.c[1] == pytest.approx(0.096225044864937627, rel=1e-13)


@given(st.floats(0.05, 2.2), st.floats(0.1, 0.9), st.integers(1, 40))
@settings(max_examples=100, deadline=None)
def test_scaling_in_n0(x, frac, n):
    d = derive(ModelParams.from_natural(n0=1.0, x=x))
    n0 = frac * d.nc
    lam = 1.7
    base = log_combinants(d, n0, np.array([n]))[0]
    scaled = log_combinants(d, lam * n0, np.array([n]))[0]
    # C_n depends on n0 only through n0^n
    assert scaled - base == pytest.approx(n * math.log(lam), rel=1e-12)


def test_rare_gas_combinant_limit():
    # exact C_n / [n0^n n^-4 (2/x)^(3(n-1)/2)] -> 1 as x grows; the
    # leading correction is measured to be (n^2-1)/(4x)
    for x in (1e2, 1e3, 1e4):
        d = derive(ModelParams.from_natural(n0=1.0, x=x))
        for n in (2, 3, 4):
            exact = math.exp(log_combinants(d, 1.0, np.array([n]))[0])
            rare = n ** -4.0 * (2.0 / d.x) ** (1.5 * (n - 1))
            ratio = exact / rare
            assert abs(ratio - 1.0) < 1.2 * (n * n - 1) / (4.0 * x)
            if x >= 1e3:
                assert ratio == pytest.approx(1.0, abs=1e-2)


def test_poisson_reduction_exact():
    # a series holding only C_1 = n0 is the Poisson case: p_n = n0^n e^-n0 / n!
    d = derive(ModelParams.from_natural(n0=1.0, x=1.0))
    n0 = 0.8
    series = CombinantSeries(log_c=np.array([math.log(n0)]), n0=n0, derived=d,
                             truncation_error=0.0)
    dist = multiplicity_distribution(series)
    assert dist.mean == pytest.approx(n0, rel=1e-14)
    for n in range(min(len(dist.p), 25)):
        assert dist.p[n] == pytest.approx(
            n0 ** n * math.exp(-n0) / math.factorial(n), rel=1e-12)


def test_recurrence_matches_generating_function(x1):
    # package recurrence vs mpmath Taylor expansion of the generating
    # function, n <= 30
    series = combinants(x1, 1.0, auto_order(x1, 1.0))
    dist = multiplicity_distribution(series, mass_tol=1e-15)
    reference = oracles.pn_from_generating_function(1.0, 1.0, 30)
    assert len(dist.p) > 30
    for n in range(31):
        assert dist.p[n] == pytest.approx(float(reference[n]), rel=1e-10)


def test_p0_and_mean_frozen_values(x1):
    # frozen against mpmath series: sum C = 1.1263592462560583
    series = combinants(x1, 1.0, auto_order(x1, 1.0))
    dist = multiplicity_distribution(series)
    assert dist.p[0] == pytest.approx(0.32421148447763246, rel=1e-12)
    assert dist.mean == pytest.approx(1.2958403709176900, rel=1e-12)
    assert 1.29 < dist.mean < 1.30


def test_distribution_normalization_and_mean(x1):
    for n0 in (0.25, 1.0, 2.0):
        series = combinants(x1, n0, auto_order(x1, n0))
        dist = multiplicity_distribution(series)
        assert dist.p.min() >= 0.0
        assert 1.0 - 1e-9 <= dist.p.sum() <= 1.0 + 1e-12
        direct = float(np.dot(np.arange(len(dist.p)), dist.p))
        assert direct == pytest.approx(dist.mean, rel=1e-8)
        # <n> = sum k C_k identity
        assert mean_multiplicity(series) == pytest.approx(dist.mean, rel=1e-12)


def test_mean_of_poisson_seed_is_n0():
    d = derive(ModelParams.from_natural(n0=1.0, x=0.01))
    series = CombinantSeries(log_c=np.array([math.log(0.7)]), n0=0.7, derived=d,
                             truncation_error=0.0)
    assert mean_multiplicity(series) == pytest.approx(0.7, rel=1e-9)


def test_trichotomy_classification(x1):
    nc = x1.nc
    assert classify_regime(x1, 1.0) is Regime.CONVERGENT
    assert classify_regime(x1, 0.9 * nc) is Regime.CONVERGENT
    assert classify_regime(x1, nc) is Regime.CRITICAL
    assert classify_regime(x1, nc * (1 + 5e-10)) is Regime.CRITICAL
    assert classify_regime(x1, 1.1 * nc) is Regime.CONDENSED
    assert classify_regime(x1, 3.0) is Regime.CONDENSED


def test_limit_n_cn(x1):
    n = np.arange(1, 1001)
    sub = np.exp(log_combinants(x1, 0.9 * x1.nc, n) + np.log(n))
    assert sub[-1] < 1e-40
    crit = np.exp(log_combinants(x1, x1.nc, n) + np.log(n))
    assert abs(crit[-1] - 1.0) < 1e-6
    assert x1.gamma_ratio < 0.9


def test_condensed_partial_sums_grow(x1):
    n = np.arange(1, 500)
    terms = np.exp(log_combinants(x1, 1.1 * x1.nc, n) + np.log(n))
    assert np.cumsum(terms).max() > 1e6


def test_divergent_regimes_refuse(x1):
    for n0 in (x1.nc, 1.2 * x1.nc):
        series = combinants(x1, n0, 50)
        with pytest.raises(DivergentMean):
            mean_multiplicity(series)
        with pytest.raises(DivergentMean):
            multiplicity_distribution(series)
        with pytest.raises(DivergentMean):
            auto_order(x1, n0)


def test_combinants_computable_in_any_regime(x1):
    series = combinants(x1, 2.0 * x1.nc, 100)
    assert np.all(np.isfinite(series.log_c))
    assert math.isinf(series.truncation_error)


def test_truncation_error_bound(x1):
    # the geometric bound must dominate the true tail
    series = combinants(x1, 1.0, 15)
    n = np.arange(16, 2000)
    true_tail = float(np.sum(np.exp(log_combinants(x1, 1.0, n) + np.log(n))))
    assert series.truncation_error >= true_tail
    assert series.truncation_error < 10.0 * true_tail


def test_omegas_match_distribution(x1):
    series = combinants(x1, 1.0, auto_order(x1, 1.0))
    dist = multiplicity_distribution(series)
    log_w = log_omegas(x1, 1.0, 8)
    assert np.allclose(np.exp(log_w), dist.omega[:9], rtol=1e-10)


def test_omegas_defined_above_nc(x1):
    log_w = log_omegas(x1, 2.0 * x1.nc, 12)
    assert np.all(np.isfinite(log_w))
    assert np.all(np.diff(log_w) > 0.0)  # weights grow without bound


def test_n0_zero_degenerate(x1):
    series = combinants(x1, 0.0, 3)
    assert np.all(np.isneginf(series.log_c))
    dist = multiplicity_distribution(series)
    assert dist.p.tolist() == [1.0]
    assert dist.mean == 0.0


def test_distribution_near_critical_long_series(x1):
    # thousands of orders: float accumulation must not stall the mass loop
    n0 = 0.99 * x1.nc
    series = combinants(x1, n0, auto_order(x1, n0))
    dist = multiplicity_distribution(series)
    assert len(dist.p) > 2000
    assert dist.p.sum() >= 1.0 - 1e-9
    direct = float(np.dot(np.arange(len(dist.p)), dist.p))
    assert direct == pytest.approx(dist.mean, rel=1e-8)
