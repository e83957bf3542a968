import math
import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from hdphase.errors import DomainError
from hdphase.heavy_tail import (
    HeavyTailDistribution,
    absolute_moment_check,
    cdf_G,
    cdf_P,
    layer_cake_moment,
    quantile_G,
    sample,
    sigma_squared,
    tail_G,
    truncated_moment,
    unit_variance_quadrature,
)

M_GRID = [2.5, 3.0, 4.0, 6.0, 8.0]
tail_indices = st.floats(min_value=2.05, max_value=40.0)


def sigma_squared_expn(m):
    """Closed form: the far piece is the generalized exponential integral E_2(m - 2)."""
    return 1.0 + 2.0 * (-math.expm1(2.0 - m)) / (m - 2.0) + 2.0 * special.expn(2, m - 2.0)


def sigma_squared_brute(m):
    """E Y^2 = int_0^inf 2u P(|Y| > u) du, with the tail written out directly."""
    tail = lambda u: 1.0 if u < 1.0 else u ** (-m) / max(math.log(u), 1.0) ** 2
    f = lambda u: 2.0 * u * tail(u)
    pieces = [(0.0, 1.0), (1.0, math.e), (math.e, math.inf)]
    return sum(integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)[0] for a, b in pieces)


# -- cdf ----------------------------------------------------------------------

@pytest.mark.parametrize("m", M_GRID)
def test_cdf_at_one_is_half(m):
    assert cdf_G(m, 1.0) == 0.5


def test_cdf_clamp_branch_value():
    assert cdf_G(3.0, 2.0) == pytest.approx(0.9375, abs=1e-15)
    assert cdf_G(3.0, -2.0) == pytest.approx(0.0625, abs=1e-15)


def test_cdf_log_branch_value():
    # beyond e the log factor is active: 1 - 0.5 / (10^3 * ln(10)^2)
    assert cdf_G(3.0, 10.0) == pytest.approx(1 - 0.5 / (1000 * math.log(10) ** 2), rel=1e-15)


@given(m=tail_indices, x=st.floats(min_value=1.0, max_value=1e12))
def test_cdf_symmetry(m, x):
    assert cdf_G(m, -x) == pytest.approx(1.0 - cdf_G(m, x), abs=1e-15)
    assert tail_G(m, x) == cdf_G(m, -x)


@pytest.mark.parametrize("m", M_GRID + [2.01, 20.0])
def test_cdf_monotone_with_limits(m):
    x = np.linspace(-1e3, 1e3, 10_000)
    g = cdf_G(m, x)
    assert np.all(np.diff(g) >= 0)
    assert cdf_G(m, -1e300) == pytest.approx(0.0, abs=1e-300)
    assert cdf_G(m, 1e300) == 1.0
    assert cdf_G(m, -np.inf) == 0.0 and cdf_G(m, np.inf) == 1.0


def test_cdf_continuous_at_kink():
    m = 3.0
    e = math.e
    assert cdf_G(m, e * (1 - 1e-12)) == pytest.approx(cdf_G(m, e), abs=1e-12)


@pytest.mark.parametrize("m", [2.0, 1.5, -3.0, float("nan"), float("inf")])
def test_invalid_tail_index(m):
    with pytest.raises(DomainError):
        cdf_G(m, 1.0)
    with pytest.raises(DomainError):
        HeavyTailDistribution(m)


# -- quantile -----------------------------------------------------------------

def test_quantile_examples():
    assert quantile_G(3.0, 0.9375) == pytest.approx(2.0, rel=1e-14)
    for m in M_GRID:
        assert quantile_G(m, 0.5) == -1.0


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        quantile_G(3.0, p)


@pytest.mark.parametrize("m", M_GRID)
def test_quantile_cdf_roundtrip_grid(m):
    p = np.concatenate([np.linspace(1e-6, 0.5, 2001)[:-1], np.linspace(0.5, 1 - 1e-6, 2001)[1:],
                        np.logspace(-250, -6, 200)])
    assert np.max(np.abs(cdf_G(m, quantile_G(m, p)) - p)) <= 1e-10


@given(m=tail_indices, logx=st.floats(min_value=1e-9, max_value=200.0))
def test_cdf_quantile_roundtrip_lower_tail(m, logx):
    x = -math.exp(logx)
    p = cdf_G(m, x)
    if p < 1e-300:  # subnormal probabilities carry too few bits
        return
    assert quantile_G(m, p) == pytest.approx(x, rel=1e-8)


@given(m=tail_indices, logx=st.floats(min_value=1e-9, max_value=200.0))
def test_cdf_quantile_roundtrip_upper_tail(m, logx):
    # p = 1 - q carries absolute error ~1e-16, so q must stay well above that
    # for the inverse to recover x to 1e-8 relative
    x = math.exp(logx)
    if tail_G(m, x) < 1e-7:
        return
    assert quantile_G(m, cdf_G(m, x)) == pytest.approx(x, rel=1e-8)


# -- moments ------------------------------------------------------------------

def test_sigma_squared_m4_two_oracles():
    got = sigma_squared(4.0)
    assert sigma_squared_expn(4.0) == pytest.approx(1.9397332404, abs=1e-10)
    assert sigma_squared_brute(4.0) == pytest.approx(sigma_squared_expn(4.0), abs=1e-10)
    assert got == pytest.approx(sigma_squared_expn(4.0), abs=1e-10)


@pytest.mark.parametrize("m", M_GRID + [2.05, 2.2, 15.0])
def test_sigma_squared_matches_closed_form(m):
    assert sigma_squared(m) == pytest.approx(sigma_squared_expn(m), abs=1e-9)


@pytest.mark.parametrize("m", M_GRID + [15.0])
def test_sigma_squared_matches_brute_force(m):
    # the plain x-space quadrature is unreliable for m close to 2 (tail ~ u^{1-m})
    assert sigma_squared(m) == pytest.approx(sigma_squared_brute(m), abs=1e-8)


def test_sigma_squared_decreasing_and_at_least_one():
    values = [sigma_squared(m) for m in M_GRID]
    assert all(v >= 1.0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("tol", [0.0, -1e-3])
def test_sigma_squared_bad_tol(tol):
    with pytest.raises(DomainError):
        sigma_squared(3.0, tol)


def test_sigma_reproducible():
    assert HeavyTailDistribution(3.0).sigma == HeavyTailDistribution(3.0).sigma
    assert HeavyTailDistribution(3.0, quadrature_tolerance=1e-8).sigma == \
        HeavyTailDistribution(3.0, quadrature_tolerance=1e-8).sigma


@pytest.mark.parametrize("m", M_GRID)
def test_absolute_moment_identity(m):
    assert abs(absolute_moment_check(m) - (1 + 2 * m)) <= 1e-6


def test_absolute_moment_values():
    assert absolute_moment_check(3.0) == pytest.approx(7.0, abs=1e-6)
    assert absolute_moment_check(4.0) == pytest.approx(9.0, abs=1e-6)


@pytest.mark.parametrize("m", M_GRID)
def test_moment_rescales_to_unit_variance_law(m):
    dist = HeavyTailDistribution(m)
    assert absolute_moment_check(m) / dist.sigma**m == pytest.approx(dist.mth_moment(), rel=1e-10)


@pytest.mark.parametrize("m", M_GRID + [2.05])
def test_unit_variance_by_quadrature(m):
    assert abs(unit_variance_quadrature(HeavyTailDistribution(m)) - 1.0) <= 1e-8


def test_lower_moments_consistent_with_base_law():
    # E|X|^p = E|Y|^p / sigma^p, with E|Y|^p = 1 + p E_2-type integral computed here by brute force
    m, p = 4.0, 3.0
    dist = HeavyTailDistribution(m)
    f = lambda u: p * u ** (p - 1) * (1.0 if u < 1 else u ** (-m) / max(math.log(u), 1.0) ** 2)
    base = sum(integrate.quad(f, a, b, limit=500, epsabs=1e-13)[0]
               for a, b in [(0, 1), (1, math.e), (math.e, math.inf)])
    assert layer_cake_moment(dist, p) == pytest.approx(base / dist.sigma**p, rel=1e-9)
    with pytest.raises(DomainError):
        layer_cake_moment(dist, m)


@pytest.mark.parametrize("m", [2.5, 3.0, 6.0])
def test_no_moment_beyond_m(m):
    vals = [truncated_moment(m, m + 0.5, k) for k in (1e2, 1e4, 1e6, 1e8)]
    steps = np.diff(vals)
    assert np.all(steps > 0)
    assert np.all(np.diff(steps) > 0)  # increments grow: no convergence
    # contrast: a moment below m settles
    below = [truncated_moment(m, m - 0.5, k) for k in (1e4, 1e8, 1e12)]
    assert below[2] - below[1] < below[1] - below[0]


# -- unit-variance law --------------------------------------------------------

def test_cdf_P_examples():
    dist = HeavyTailDistribution(3.0)
    assert cdf_P(dist, 1.0 / dist.sigma) == 0.5
    for x in [1.0, 2.0, 10.0, 1e4]:
        sx = dist.sigma * x
        assert 1.0 - cdf_P(dist, x) == pytest.approx(0.5 * sx ** -3 / max(math.log(sx), 1) ** 2, rel=1e-9)
        assert dist.sf(x) == pytest.approx(0.5 * sx ** -3 / max(math.log(sx), 1) ** 2, rel=1e-14)
        assert cdf_P(dist, x) + cdf_P(dist, -x) == pytest.approx(1.0, abs=1e-15)


def test_distribution_immutable():
    dist = HeavyTailDistribution(3.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        dist.sigma = 2.0


# -- sampling -----------------------------------------------------------------

@pytest.fixture(scope="module")
def draws_m3():
    dist = HeavyTailDistribution(3.0)
    return dist, sample(dist, np.random.default_rng(12345), 10**6)


def test_sample_mean_and_variance(draws_m3):
    _, x = draws_m3
    assert abs(x.mean()) <= 4 * 1e-3
    assert 0.9 <= x.var() <= 1.1


def test_sample_support(draws_m3):
    dist, x = draws_m3
    assert np.all(np.abs(x) >= 1.0 / dist.sigma)


def test_sample_ks_against_cdf(draws_m3):
    dist, x = draws_m3
    assert stats.kstest(x, dist.cdf).statistic <= 2e-3


def test_sample_shape_and_determinism():
    dist = HeavyTailDistribution(2.5)
    a = sample(dist, np.random.default_rng(1), (3, 4))
    b = sample(dist, np.random.default_rng(1), (3, 4))
    assert a.shape == (3, 4)
    assert np.array_equal(a, b)


def test_sample_is_quantile_of_uniform():
    dist = HeavyTailDistribution(4.0)
    u = np.random.default_rng(7).random(1000)
    x = sample(dist, np.random.default_rng(7), 1000)
    assert np.allclose(x, quantile_G(4.0, u) / dist.sigma, rtol=1e-12)
