"""
Tests for per-device success probabilities
"""
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import math

import numpy as np
import pytest
from scipy import integrate

from src.analysis.laplace import LaplaceModel, LaplaceVariant, laplace_crs, laplace_rrs
from src.analysis.success import (
    GilPelaezTerms,
    b_term,
    crs_avg_served,
    crs_conditional_success,
    crs_overall_success,
    crs_rank_success,
    crs_rank_table,
    rrs_success,
)
from src.network.occupancy import poisson_pmf
from src.network.params import NetworkParams
from src.network.scheduling import PowerControl, PowerRule
from src.utils.errors import DomainError


@pytest.fixture
def rrs_model():
    return LaplaceModel.build(NetworkParams(), LaplaceVariant.RRS_WEIGHTED)


def test_first_decoded_alone_is_transform(rrs_model):
    assert rrs_success(1, 1, 1.0, 0.0, rrs_model) == pytest.approx(laplace_rrs(rrs_model, 1.0))


def test_unit_threshold_first_decoded_equals_sole(rrs_model):
    assert rrs_success(1, 2, 1.0, 0.0, rrs_model) == pytest.approx(rrs_success(1, 1, 1.0, 0.0, rrs_model), rel=1e-14)


def test_first_decoded_below_unit_threshold(rrs_model):
    theta = 0.5
    L = lambda s: laplace_rrs(rrs_model, s)
    expected = 2.0 / 1.5 * L(0.5) - 0.5 / 1.5 * L(2.0)
    assert rrs_success(1, 2, theta, 0.0, rrs_model) == pytest.approx(expected, rel=1e-14)


def test_second_decoded_zero_branch(rrs_model):
    assert rrs_success(2, 2, 2.0, 0.5, rrs_model) == 0.0
    assert rrs_success(2, 2, 1.0, 1.0, rrs_model) == 0.0
    assert rrs_success(2, 2, 1.0, 0.0, rrs_model) > 0.0


def test_rrs_success_domain(rrs_model):
    with pytest.raises(DomainError):
        rrs_success(2, 1, 1.0, 0.0, rrs_model)
    with pytest.raises(DomainError):
        rrs_success(1, 1, 0.0, 0.0, rrs_model)


def test_b_term_order_statistics():
    # E[h_(1)] of two unit exponentials is 1 + 1/2
    assert b_term(1, 1, 1, 2, 1, 1.0, 0.0) == pytest.approx(1.5)
    assert b_term(1, 1, 1, 2, 1, 2.0, 0.0) == pytest.approx(0.75)


def test_b_term_unpopulated_rank():
    with pytest.raises(DomainError):
        b_term(1, 2, 5, 30, 30, 1.0, 0.0)
    with pytest.raises(DomainError):
        b_term(1, 1, 3, 2, 30, 1.0, 0.0)


@pytest.mark.parametrize("B", [0.3, 2.0, 10.0])
def test_rank_success_matches_levy_mixture(B):
    params = NetworkParams(alpha=4.0)
    model = LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED)
    terms = GilPelaezTerms.from_model(model, 1.0, B)
    expected = math.fsum(beta * math.erfc(nu / (2.0 * math.sqrt(B))) for beta, nu in zip(terms.beta, terms.nu))
    assert crs_rank_success(1, 1, 1, 40, terms, model) == pytest.approx(expected, abs=1e-6)


def test_rank_success_negative_margin_fails():
    model = LaplaceModel.build(NetworkParams(alpha=4.0), LaplaceVariant.CRS_WEIGHTED)
    terms = GilPelaezTerms.from_model(model, 1.0, -0.5)
    assert crs_rank_success(2, 2, 1, 40, terms, model) == pytest.approx(0.0, abs=1e-6)


def test_rank_success_needs_weighted_transform(rrs_model):
    terms = GilPelaezTerms(nu=(0.1,), beta=(1.0,), B=1.0, alpha=3.6)
    with pytest.raises(DomainError):
        crs_rank_success(1, 1, 1, 40, terms, rrs_model)


def test_sparse_clusters_reduce_to_single_device():
    params = NetworkParams(m_bar=1e-3)
    power = PowerControl.from_params(params)
    p_single = laplace_crs(LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED), params.theta, power.delta)
    assert crs_overall_success(params, power) == pytest.approx(p_single, rel=1e-9)
    assert crs_conditional_success(1, 1, params, power) == pytest.approx(p_single, rel=1e-12)
    with pytest.raises(DomainError):
        crs_conditional_success(1, 2, params, power)


def test_empty_clusters_serve_nobody():
    params = NetworkParams(m_bar=0.0)
    assert crs_avg_served(params, PowerControl.from_params(params)) == 0.0


def test_equal_reliability_split_equalizes_shared_success():
    params = NetworkParams(N=4, m_bar=6.0, L=2)
    power = PowerControl.from_params(params, PowerRule.EQUAL_RELIABILITY)
    first = crs_conditional_success(1, 2, params, power)
    second = crs_conditional_success(2, 2, params, power)
    assert 0.0 <= first <= 1.0
    assert first == pytest.approx(second, abs=1e-9)


def test_channel_aware_success_bounds():
    params = NetworkParams(N=4, m_bar=6.0, L=2)
    power = PowerControl.from_params(params, PowerRule.FIXED)
    for j, u in ((1, 1), (1, 2), (2, 2)):
        assert 0.0 <= crs_conditional_success(j, u, params, power) <= 1.0
    served = crs_avg_served(params, power)
    assert 0.0 < served <= 8.0
    assert 0.0 < crs_overall_success(params, power) <= 1.0


def _inversion_by_complex_transform(terms: GilPelaezTerms) -> float:
    """1/2 - (1/pi) int_0^inf Im{L(-i phi) exp(-i phi B)} / phi dphi with L evaluated in complex arithmetic."""
    alpha, B = terms.alpha, terms.B
    beta, nu = np.array(terms.beta), np.array(terms.nu)

    def transform(phi):
        return np.sum(beta * np.exp(-nu * (-1j * phi) ** (2.0 / alpha)))

    # phi in [0, 1] through x = phi^(2/alpha), where the integrand stays finite
    def head(x):
        phi = x ** (alpha / 2.0)
        return (alpha / 2.0) * np.imag(transform(phi) * np.exp(-1j * phi * B)) / x

    sigma = min(terms.sigma)
    end = (40.0 / sigma) ** (alpha / 2.0)
    omega = abs(B)
    sign = 1.0 if B >= 0 else -1.0
    total, _ = integrate.quad(head, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    if omega == 0.0:
        tail, _ = integrate.quad(lambda phi: np.imag(transform(phi)) / phi, 1.0, end, epsabs=1e-13, limit=2000)
        return 0.5 - (total + tail) / math.pi
    cos_part, _ = integrate.quad(lambda phi: np.imag(transform(phi)) / phi, 1.0, end,
                                 weight="cos", wvar=omega, epsabs=1e-13, limit=2000)
    sin_part, _ = integrate.quad(lambda phi: np.real(transform(phi)) / phi, 1.0, end,
                                 weight="sin", wvar=omega, epsabs=1e-13, limit=2000)
    return 0.5 - (total + cos_part - sign * sin_part) / math.pi


@pytest.mark.parametrize("lambda_a", [1e-3, 3e-4])
@pytest.mark.parametrize("delta", [1.0, 0.75])
def test_rank_success_matches_complex_inversion(lambda_a, delta):
    params = NetworkParams(alpha=3.6, lambda_a=lambda_a, delta=delta)
    model = LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED)
    for B in (-0.5, 0.3, 1.0, 2.5, 5.0):
        terms = GilPelaezTerms.from_model(model, delta, B)
        real_axis = math.fsum(b * math.exp(-n * 2.0 ** (2.0 / 3.6)) for b, n in zip(terms.beta, terms.nu))
        assert real_axis == pytest.approx(laplace_crs(model, 2.0, delta), rel=1e-12)
        expected = min(max(_inversion_by_complex_transform(terms), 0.0), 1.0)
        assert crs_rank_success(1, 1, 1, 40, terms, model) == pytest.approx(expected, abs=1e-6)


def test_overall_success_normalized_by_summed_cluster_sizes():
    params = NetworkParams(N=4, m_bar=6.0, L=2)
    power = PowerControl.from_params(params, PowerRule.FIXED)
    tau = 0.05
    table = crs_rank_table(params, power, tau)
    weights = poisson_pmf([row.K for row in table], params.m_bar)
    small = poisson_pmf(list(range(1, params.N + 1)), params.m_bar)
    p_single = laplace_crs(LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED), params.theta, power.delta)
    numerator = p_single * math.fsum(small) + math.fsum(w * row.successes / row.served for row, w in zip(table, weights))
    expected = numerator / (math.fsum(small) + math.fsum(weights))
    assert crs_overall_success(params, power, tau) == pytest.approx(expected, rel=1e-12)
    # the tail beyond k_max is left out of both sums
    assert math.fsum(small) + math.fsum(weights) < -math.expm1(-params.m_bar) - 1e-6
