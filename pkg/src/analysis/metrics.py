"""Network-level metrics: overall success, served devices and transmit power."""
import logging
import math
from enum import Enum
from typing import Optional

from src.analysis.laplace import LaplaceModel, LaplaceVariant
from src.analysis.report import Estimate, MetricReport
from src.analysis.success import (
    DEVICE_CLASSES,
    crs_avg_served,
    crs_conditional_success,
    crs_overall_success,
    crs_rank_average,
    rrs_success,
)
from src.network.occupancy import occupancy_pmf, poisson_cdf_below, poisson_partial_mean
from src.network.params import NetworkParams, OccupancyPMF
from src.network.scheduling import PowerControl, PowerRule
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    OMA = "oma"
    RRS = "rrs"
    CRS_FIXED = "crs_fixed"
    CRS_EQUAL = "crs_equal"

    @property
    def channel_aware(self) -> bool:
        return self in (Scheme.CRS_FIXED, Scheme.CRS_EQUAL)

    def resolve_params(self, params: NetworkParams) -> NetworkParams:
        """OMA always runs one device per channel."""
        return params.model_copy(update={"L": 1}) if self is Scheme.OMA else params

    def power_control(self, params: NetworkParams, split: float = 0.5) -> Optional[PowerControl]:
        if not self.channel_aware:
            return None
        rule = PowerRule.EQUAL_RELIABILITY if self is Scheme.CRS_EQUAL else PowerRule.FIXED
        return PowerControl.from_params(params, rule, split)


def rrs_overall_success(pmf: OccupancyPMF, p11: float, p12: float, p22: float) -> float:
    """Mean success over the devices of a typical non-empty channel."""
    c0, c1, c2 = pmf.get(0), pmf.get(1), pmf.get(2)
    if pmf.L > 2:
        raise DomainError(f"Overall success is defined for L <= 2, got L={pmf.L}")
    if c0 >= 1.0:
        raise DomainError("No active devices: c_0 = 1")
    active = 1.0 - c0
    return c1 / active * p11 + c2 / (2.0 * active) * (p12 + p22)


def rrs_avg_served(params: NetworkParams, p11: float, p12: float = 0.0, p22: float = 0.0) -> float:
    """Mean number of devices decoded successfully per cluster under random scheduling."""
    N, m = params.N, params.m_bar
    if params.L > 2:
        raise DomainError(f"Served-device count is defined for L <= 2, got L={params.L}")
    # E[K; K <= N]
    a1 = poisson_partial_mean(N + 1, m)
    # N Pr(K > N)
    a3 = N * (1.0 - poisson_cdf_below(N + 1, m))
    if params.L == 1:
        return p11 * (a1 + a3)
    # E[2N - K; N < K < 2N]
    a2 = 2 * N * (poisson_cdf_below(2 * N, m) - poisson_cdf_below(N + 1, m)) - (
        poisson_partial_mean(2 * N, m) - poisson_partial_mean(N + 1, m)
    )
    return p11 * (a1 + a2) + (p12 + p22) * (a3 - a2)


def avg_power(params: NetworkParams, pmf: OccupancyPMF, scheme: str, delta: Optional[float] = None) -> float:
    """Average transmit power per orthogonal channel.

    ``scheme`` is ``"oma"`` or ``"hybrid"``; hybrid channels holding two
    devices spend ``delta`` times the single-device power (delta = 2 when both
    transmit at full power).
    """
    psi = params.psi
    if scheme == "oma":
        return (1.0 - pmf.get(0)) * psi
    if scheme == "hybrid":
        delta = params.delta if delta is None else delta
        return (pmf.get(1) + delta * pmf.get(2)) * psi
    raise DomainError(f"Unknown power scheme '{scheme}'")


def analytic_report(
    params: NetworkParams,
    scheme: Scheme,
    variant: LaplaceVariant = LaplaceVariant.RRS_WEIGHTED,
    split: float = 0.5,
    record_per_rank: bool = False,
    tau: Optional[float] = None,
) -> MetricReport:
    """Evaluate every analytic metric of ``scheme`` at one parameter point."""
    scheme = Scheme(scheme)
    params = scheme.resolve_params(params)
    pmf = occupancy_pmf(params)
    logger.info(f"Analytic evaluation: scheme={scheme.value}, N={params.N}, L={params.L}, m_bar={params.m_bar}")

    occupancy = {u: Estimate.exact(c_u) for u, c_u in enumerate(pmf.c)}
    idle = pmf.get(0) >= 1.0
    if idle:
        logger.warning(f"No active devices at m_bar={params.m_bar}: overall success is undefined")
    if scheme.channel_aware:
        power = scheme.power_control(params, split)
        classes = [(j, u) for j, u in DEVICE_CLASSES if u <= params.L]
        success = {}
        for j, u in classes:
            try:
                value = crs_conditional_success(j, u, params, power, tau)
            except DomainError as e:
                logger.warning(f"Skipping class (j={j}, u={u}): {e}")
                value = math.nan
            success[(j, u)] = Estimate.exact(value)
        per_rank = {}
        if record_per_rank:
            for j, u in classes:
                for i in range(1, params.N + 1):
                    value = crs_rank_average(j, u, i, params, power, tau)
                    if not math.isnan(value):
                        per_rank[(j, u, i)] = Estimate.exact(value)
        overall = math.nan if idle else crs_overall_success(params, power, tau)
        served = crs_avg_served(params, power, tau)
        power_per_channel = avg_power(params, pmf, "hybrid" if params.L == 2 else "oma", power.delta)
    else:
        model = LaplaceModel.build(params, variant, pmf)
        p = {(j, u): rrs_success(j, u, params.theta, params.mu, model) for j, u in DEVICE_CLASSES if u <= params.L}
        success = {key: Estimate.exact(value) for key, value in p.items()}
        per_rank = {}
        p11, p12, p22 = p[(1, 1)], p.get((1, 2), 0.0), p.get((2, 2), 0.0)
        overall = math.nan if idle else rrs_overall_success(pmf, p11, p12, p22)
        served = rrs_avg_served(params, p11, p12, p22)
        power_per_channel = avg_power(params, pmf, "hybrid" if params.L == 2 else "oma", 2.0)

    return MetricReport(
        scheme=scheme.value,
        source="analytic",
        success=success,
        overall_success=Estimate.exact(overall),
        avg_served=Estimate.exact(served),
        avg_power=Estimate.exact(power_per_channel),
        occupancy=occupancy,
        per_rank=per_rank,
    )
