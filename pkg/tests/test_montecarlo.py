"""
Tests for the Monte Carlo network simulator
"""
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import math

import numpy as np
import pandas as pd
import pytest

from src.analysis.metrics import Scheme, analytic_report
from src.network.occupancy import occupancy_pmf
from src.network.params import NetworkParams
from src.network.scheduling import PowerControl, crs_assign, delta_star, rrs_assign
from src.simulation.montecarlo import (
    Realization,
    SimConfig,
    channel_interference,
    estimate_metrics,
    evaluate_sir,
    sample_realization,
)
from src.utils.errors import DomainError


def _isolated(h, r_a=None):
    """Typical cluster with no interfering clusters in the window."""
    h = np.asarray(h, dtype=float)
    empty = np.array([], dtype=float)
    return Realization(
        aggregators=np.zeros((0, 2)),
        counts=np.array([], dtype=int),
        distance=empty,
        r_a=empty,
        g=empty,
        channel=np.array([], dtype=int),
        weight=empty,
        typical_r_a=np.full(h.size, 10.0) if r_a is None else np.asarray(r_a, dtype=float),
        typical_h=h,
    )


def test_window_must_hold_a_cluster():
    params = NetworkParams(lambda_a=1e-3)
    with pytest.raises(DomainError):
        SimConfig(expected_aggregators=1.0).window_side(params)
    assert SimConfig().window_side(params) == pytest.approx(math.sqrt(400.0 / 1e-3))


def test_sample_realization_geometry():
    params = NetworkParams(m_bar=8.0, N=4)
    config = SimConfig(expected_aggregators=100.0)
    realization = sample_realization(params, config, np.random.default_rng(11))
    side = config.window_side(params)
    assert np.all(np.abs(realization.aggregators) <= side / 2.0)
    assert realization.counts.sum() == realization.r_a.size == realization.g.size
    assert np.all(realization.r_a <= params.R_a) and np.all(realization.typical_r_a <= params.R_a)
    assert np.all(realization.g > 0) and np.all(realization.typical_h > 0)
    scheduled = realization.channel >= 0
    assert np.all(realization.channel[scheduled] < params.N)
    assert np.all(realization.weight[~scheduled] == 0.0)


def test_empty_clusters():
    params = NetworkParams(m_bar=0.0)
    realization = sample_realization(params, SimConfig(expected_aggregators=50.0), np.random.default_rng(1))
    assert realization.counts.sum() == 0
    assert realization.K == 0
    assert np.all(channel_interference(realization, params) == 0.0)


def test_mean_aggregator_count():
    params = NetworkParams(m_bar=0.0)
    config = SimConfig(expected_aggregators=400.0)
    counts = [sample_realization(params, config, np.random.default_rng(s)).aggregators.shape[0] for s in range(200)]
    assert np.mean(counts) == pytest.approx(400.0, abs=4.0 * math.sqrt(400.0 / 200))


def test_device_offsets_follow_disc_law():
    from scipy import stats

    params = NetworkParams(m_bar=20.0)
    realization = sample_realization(params, SimConfig(expected_aggregators=100.0), np.random.default_rng(5))
    result = stats.kstest(realization.r_a, lambda r: np.clip(r / params.R_a, 0.0, 1.0) ** 2)
    assert result.pvalue > 0.01


def test_interfering_channel_aware_marks():
    params = NetworkParams(m_bar=40.0, N=30, L=2)
    power = PowerControl(delta=1.0, N=30, split=0.25)
    config = SimConfig(expected_aggregators=50.0, scheme="crs_fixed")
    realization = sample_realization(params, config, np.random.default_rng(2), power)
    weights = set(np.round(realization.weight, 12).tolist())
    assert weights <= {0.0, 0.25, 0.75, 1.0}


def test_random_pair_sic_without_interference():
    params = NetworkParams(N=1, L=2, theta=1.0, mu=0.0)
    realization = _isolated([0.5, 2.0])
    assignment = rrs_assign(2, 1, 2, np.random.default_rng(0))
    samples = sorted(evaluate_sir(realization, assignment, params, Scheme.RRS), key=lambda s: s.j)
    assert samples[0].device == 1 and samples[0].sir == pytest.approx(4.0)
    assert math.isinf(samples[1].sir) and samples[1].success
    assert all(s.u == 2 for s in samples)


def test_full_residue_fails_second_device():
    params = NetworkParams(N=1, L=2, theta=1.0, mu=1.0)
    realization = _isolated([0.5, 2.0])
    assignment = rrs_assign(2, 1, 2, np.random.default_rng(0))
    second = [s for s in evaluate_sir(realization, assignment, params, Scheme.RRS) if s.j == 2][0]
    assert second.sir == pytest.approx(0.25)
    assert not second.success


def test_channel_aware_pair_uses_power_weights():
    params = NetworkParams(N=1, L=2, theta=1.0, mu=0.5, alpha=4.0, rho=2.0)
    realization = _isolated([1.0, 3.0], r_a=[10.0, 20.0])
    power = PowerControl(delta=1.0, N=1, split=0.25)
    assignment = crs_assign(realization.typical_h, 1, 2, power)
    first, second = sorted(evaluate_sir(realization, assignment, params, Scheme.CRS_FIXED), key=lambda s: s.j)
    assert first.device == 1 and first.rank == 1
    assert first.sir == pytest.approx(0.25 * 3.0 / (0.75 * 1.0))
    assert second.sir == pytest.approx(0.75 * 1.0 / (0.5 * 0.25 * 3.0))
    assert first.power == pytest.approx(2.0 * 0.25 * 20.0 ** 4)


def test_interference_adds_per_channel():
    params = NetworkParams(N=2, alpha=4.0)
    realization = _isolated([1.0])
    realization.distance = np.array([100.0, 200.0, 50.0])
    realization.r_a = np.array([10.0, 20.0, 5.0])
    realization.g = np.array([1.0, 2.0, 4.0])
    realization.channel = np.array([0, 0, -1])
    realization.weight = np.array([1.0, 0.5, 0.0])
    interference = channel_interference(realization, params)
    assert interference[0] == pytest.approx((10 / 100) ** 4 + 0.5 * 2.0 * (20 / 200) ** 4)
    assert interference[1] == 0.0


def test_same_seed_same_report():
    params = NetworkParams(N=4, m_bar=6.0)
    config = SimConfig(runs=30, expected_aggregators=40.0, seed=99, chunk_size=7)
    first = estimate_metrics(params, config).to_frame()
    second = estimate_metrics(params, config).to_frame()
    pd.testing.assert_frame_equal(first, second)


def test_chunking_does_not_change_results():
    params = NetworkParams(N=4, m_bar=6.0)
    small = SimConfig(runs=24, expected_aggregators=40.0, seed=5, chunk_size=5, scheme="crs_equal")
    large = small.model_copy(update={"chunk_size": 24})
    pd.testing.assert_frame_equal(estimate_metrics(params, small).to_frame(), estimate_metrics(params, large).to_frame())


def test_full_residue_never_decodes_second_device():
    params = NetworkParams(N=10, m_bar=15.0, mu=1.0, theta=1.0)
    report = estimate_metrics(params, SimConfig(runs=50, expected_aggregators=40.0, seed=3))
    assert report.success[(2, 2)].value == 0.0


def test_occupancy_histogram_matches_closed_form():
    params = NetworkParams(N=4, m_bar=6.0, L=2)
    report = estimate_metrics(params, SimConfig(runs=400, expected_aggregators=40.0, seed=17))
    pmf = occupancy_pmf(params)
    for u, estimate in report.occupancy.items():
        standard_error = (estimate.ci_high - estimate.value) / 1.959963984540054
        assert abs(estimate.value - pmf.c[u]) <= 4.0 * standard_error + 1e-12


@pytest.mark.slow
def test_worker_processes_match_inline_run():
    params = NetworkParams(N=4, m_bar=6.0)
    inline = SimConfig(runs=40, expected_aggregators=40.0, seed=8, chunk_size=10)
    pooled = inline.model_copy(update={"workers": 2})
    pd.testing.assert_frame_equal(estimate_metrics(params, inline).to_frame(), estimate_metrics(params, pooled).to_frame())


@pytest.mark.slow
def test_random_scheduling_agrees_with_analytic():
    params = NetworkParams()
    simulated = estimate_metrics(params, SimConfig(runs=10000, seed=1, scheme="rrs"))
    analytic = analytic_report(params, Scheme.RRS)
    assert simulated.success[(1, 1)].value == pytest.approx(analytic.success[(1, 1)].value, abs=0.02)
    assert simulated.success[(1, 2)].value == pytest.approx(analytic.success[(1, 2)].value, abs=0.03)
    assert simulated.success[(2, 2)].value == pytest.approx(analytic.success[(2, 2)].value, abs=0.03)


@pytest.mark.slow
def test_channel_aware_scheduling_agrees_with_analytic():
    params = NetworkParams()
    simulated = estimate_metrics(params, SimConfig(runs=10000, seed=2, scheme="crs_equal"))
    analytic = analytic_report(params, Scheme.CRS_EQUAL)
    assert simulated.success[(1, 1)].value == pytest.approx(analytic.success[(1, 1)].value, abs=0.03)
    assert simulated.success[(1, 2)].value == pytest.approx(analytic.success[(1, 2)].value, abs=0.05)
    assert simulated.success[(2, 2)].value == pytest.approx(analytic.success[(2, 2)].value, abs=0.05)


@pytest.mark.slow
def test_oma_power_matches_closed_form():
    params = NetworkParams()
    simulated = estimate_metrics(params, SimConfig(runs=10000, seed=4, scheme="oma"))
    analytic = analytic_report(params, Scheme.OMA)
    assert simulated.avg_power.value == pytest.approx(analytic.avg_power.value, rel=0.01)


@pytest.mark.slow
def test_equal_reliability_split_is_fair():
    params = NetworkParams()
    report = estimate_metrics(params, SimConfig(runs=10000, seed=6, scheme="crs_equal"))
    assert abs(report.success[(1, 2)].value - report.success[(2, 2)].value) <= 0.07


@pytest.mark.slow
def test_denser_network_lowers_success():
    sparse = estimate_metrics(NetworkParams(lambda_a=10 ** -4.8), SimConfig(runs=5000, seed=9))
    dense = estimate_metrics(NetworkParams(lambda_a=4 * 10 ** -4.8), SimConfig(runs=5000, seed=9))
    assert dense.success[(1, 1)].value <= sparse.success[(1, 1)].value


@pytest.mark.slow
def test_hybrid_power_matches_closed_form():
    base = NetworkParams()
    params = base.model_copy(update={"delta": delta_star(base).value})
    pmf = occupancy_pmf(params)
    hybrid = estimate_metrics(params, SimConfig(runs=10000, seed=4, scheme="crs_fixed"))
    oma = estimate_metrics(params, SimConfig(runs=10000, seed=4, scheme="oma"))
    assert hybrid.avg_power.value == pytest.approx((pmf.c[1] + params.delta * pmf.c[2]) * params.psi, rel=0.01)
    assert hybrid.avg_power.value / oma.avg_power.value < 1.0


@pytest.mark.slow
def test_sharing_serves_more_when_success_holds_up():
    params = NetworkParams(N=20, m_bar=60.0)
    shared = estimate_metrics(params, SimConfig(runs=5000, seed=11, scheme="crs_equal"))
    single = estimate_metrics(params.model_copy(update={"L": 1}), SimConfig(runs=5000, seed=11, scheme="crs_fixed"))
    if shared.overall_success.value > 0.5 * single.overall_success.value:
        assert shared.avg_served.value > single.avg_served.value
    else:
        assert shared.avg_served.value <= single.avg_served.value
