"""Per-device success probabilities under random and channel-aware scheduling."""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from src.analysis.laplace import LaplaceModel, LaplaceVariant, laplace_crs, laplace_rrs, stable_exponents
from src.network.occupancy import kmax_for_tail, poisson_pmf
from src.network.params import NetworkParams
from src.network.scheduling import PowerControl
from src.numerics.specfun import QuadratureSpec, digamma, integrate_gil_pelaez
from src.utils.config import get_config
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)

DEVICE_CLASSES = ((1, 1), (1, 2), (2, 2))

# |1 - theta| below this uses the theta >= 1 branch of the first-decoded formula
_THETA_ONE_GUARD = 1e-12


def _check_class(j: int, u: int):
    if (j, u) not in DEVICE_CLASSES:
        raise DomainError(f"(j, u) must be one of {DEVICE_CLASSES}, got ({j}, {u})")


def rrs_success(j: int, u: int, theta: float, mu: float, model: LaplaceModel) -> float:
    """Success probability of the j-th decoded device on a channel holding u devices."""
    _check_class(j, u)
    if not (theta > 0 and 0.0 <= mu <= 1.0):
        raise DomainError(f"Invalid theta={theta} or mu={mu}")
    L = lambda s: laplace_rrs(model, s)

    if (j, u) == (1, 1):
        return L(theta)
    if (j, u) == (1, 2):
        if theta < 1.0 and abs(1.0 - theta) >= _THETA_ONE_GUARD:
            return 2.0 / (1.0 + theta) * L(theta) - (1.0 - theta) / (1.0 + theta) * L(2.0 * theta / (1.0 - theta))
        return 2.0 / (1.0 + theta) * L(theta)
    if theta * mu >= 1.0:
        return 0.0
    return (1.0 - theta * mu) / (1.0 + theta * mu) * L(2.0 * theta / (1.0 - theta * mu))


@dataclass(frozen=True)
class GilPelaezTerms:
    """Stable-law exponents nu_t of the weighted transform and the location term B."""

    nu: tuple[float, ...]
    beta: tuple[float, ...]
    B: float
    alpha: float

    @property
    def sigma(self) -> tuple[float, ...]:
        return tuple(nu * math.cos(math.pi / self.alpha) for nu in self.nu)

    @property
    def rho(self) -> tuple[float, ...]:
        return tuple(nu * math.sin(math.pi / self.alpha) for nu in self.nu)

    @classmethod
    def from_model(cls, model: LaplaceModel, delta: float, B: float) -> "GilPelaezTerms":
        pairs = stable_exponents(model, delta)
        return cls(
            nu=tuple(nu for _, nu in pairs),
            beta=tuple(beta for beta, _ in pairs),
            B=B,
            alpha=model.params.alpha,
        )


def b_term(j: int, u: int, i: int, K: int, N: int, theta: float, mu: float, a_i: float = 1.0, b_i: float = 1.0) -> float:
    """Mean interference margin of the rank-i device(s) when K devices are ranked by gain.

    Uses E[h_(i)] = psi(K+1) - psi(i) for the i-th largest of K unit exponentials.
    """
    _check_class(j, u)
    if not 1 <= i <= N or K < i or (u == 2 and K < i + N):
        raise DomainError(f"Rank i={i} is not populated with K={K}, N={N}, u={u}")
    psi_k, psi_i = digamma(K + 1), digamma(i)
    if (j, u) == (1, 1):
        return (psi_k - psi_i) / theta
    psi_in = digamma(i + N)
    if (j, u) == (1, 2):
        return (a_i / theta - b_i) * psi_k + b_i * psi_in - (a_i / theta) * psi_i
    return (b_i / theta - mu * a_i) * psi_k + mu * a_i * psi_i - (b_i / theta) * psi_in


def crs_rank_success(
    j: int,
    u: int,
    i: int,
    K: int,
    terms: GilPelaezTerms,
    model: LaplaceModel,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """Pr(I_c < B) for the rank-i device by Gil-Pelaez inversion of the weighted transform."""
    if model.variant is not LaplaceVariant.CRS_WEIGHTED:
        raise DomainError(f"Rank success needs the weighted CRS transform, got {model.variant.value}")
    if not math.isfinite(terms.B):
        raise DomainError(f"Location term must be finite, got {terms.B}")
    spec = model.quad_1d if spec is None else spec
    p = 0.5 - math.fsum(
        beta * integrate_gil_pelaez(sigma, rho, terms.B, terms.alpha, spec)
        for beta, sigma, rho in zip(terms.beta, terms.sigma, terms.rho)
    )
    if not 0.0 <= p <= 1.0:
        clamped = min(max(p, 0.0), 1.0)
        log = logger.warning if abs(p - clamped) > 1e-6 else logger.debug
        log(f"Clamped success of (j={j}, u={u}, i={i}, K={K}) from {p:.6g} to {clamped}")
        p = clamped
    return p


@dataclass(frozen=True)
class RankSuccess:
    """Rank-resolved successes for one cluster size K."""

    K: int
    sole_ranks: tuple[int, ...]
    sole: tuple[float, ...]
    shared_ranks: tuple[int, ...]
    first: tuple[float, ...]
    second: tuple[float, ...]

    @property
    def served(self) -> int:
        return len(self.sole_ranks) + 2 * len(self.shared_ranks)

    @property
    def successes(self) -> float:
        return math.fsum(self.sole) + math.fsum(self.first) + math.fsum(self.second)


def _layout(K: int, N: int, L: int) -> tuple[range, range]:
    """(sole ranks, shared ranks) for K devices under channel-aware scheduling."""
    shared = max(0, min(K - N, N)) if L == 2 else 0
    return range(shared + 1, min(K, N) + 1), range(1, shared + 1)


def _resolve_tau(tau: Optional[float]) -> float:
    return get_config().TAIL_TOLERANCE if tau is None else tau


@lru_cache(maxsize=64)
def crs_rank_table(
    params: NetworkParams,
    power: PowerControl,
    tau: Optional[float] = None,
    spec: Optional[QuadratureSpec] = None,
) -> tuple[RankSuccess, ...]:
    """Rank successes for every overloaded cluster size N < K <= k_max."""
    tau = _resolve_tau(tau)
    N, L, theta, mu = params.N, params.L, params.theta, params.mu
    model = LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED)
    k_max = kmax_for_tail(params.m_bar, tau)
    spec = model.quad_1d if spec is None else spec
    delta = power.delta

    def success(j, u, i, K, a_i=1.0, b_i=1.0):
        B = b_term(j, u, i, K, N, theta, mu, a_i, b_i)
        return crs_rank_success(j, u, i, K, GilPelaezTerms.from_model(model, delta, B), model, spec)

    table = []
    for K in range(N + 1, k_max + 1):
        sole_ranks, shared_ranks = _layout(K, N, L)
        a, b = power.coefficients(K)
        table.append(RankSuccess(
            K=K,
            sole_ranks=tuple(sole_ranks),
            sole=tuple(success(1, 1, i, K) for i in sole_ranks),
            shared_ranks=tuple(shared_ranks),
            first=tuple(success(1, 2, i, K, a[i - 1], b[i - 1]) for i in shared_ranks),
            second=tuple(success(2, 2, i, K, a[i - 1], b[i - 1]) for i in shared_ranks),
        ))
    logger.info(f"Computed rank successes for K in ({N}, {k_max}] with rule={power.rule.value}, delta={delta:.4f}")
    return tuple(table)


def _single_device_success(params: NetworkParams, power: PowerControl) -> float:
    """Success of a device alone on its channel when the cluster is not overloaded."""
    model = LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED)
    return laplace_crs(model, params.theta, power.delta)


def _underloaded_mass(params: NetworkParams) -> tuple[float, float]:
    """(Pr(1 <= K <= N), E[K; K <= N])."""
    ks = np.arange(1, params.N + 1)
    weights = poisson_pmf(ks, params.m_bar)
    return math.fsum(weights), math.fsum(ks * weights)


def crs_conditional_success(
    j: int,
    u: int,
    params: NetworkParams,
    power: PowerControl,
    tau: Optional[float] = None,
) -> float:
    """Success of the j-th decoded device on a typical channel holding u devices.

    Averages rank successes over the cluster sizes and ranks that produce
    such a channel, each channel weighted by Pr(K = k) / N.
    """
    _check_class(j, u)
    N = params.N
    table = crs_rank_table(params, power, tau)
    weights = poisson_pmf([row.K for row in table], params.m_bar)

    if u == 1:
        _, mean_small = _underloaded_mass(params)
        p_single = _single_device_success(params, power)
        numerator = [p_single * mean_small / N]
        denominator = [mean_small / N]
        for row, w in zip(table, weights):
            numerator.append(w * math.fsum(row.sole) / N)
            denominator.append(w * len(row.sole_ranks) / N)
    else:
        numerator, denominator = [], []
        for row, w in zip(table, weights):
            values = row.first if j == 1 else row.second
            numerator.append(w * math.fsum(values) / N)
            denominator.append(w * len(row.shared_ranks) / N)

    mass = math.fsum(denominator)
    if mass <= 0.0:
        raise DomainError(f"No channel holds {u} device(s) for m_bar={params.m_bar}, N={N}, L={params.L}")
    return math.fsum(numerator) / mass


def crs_rank_average(j: int, u: int, i: int, params: NetworkParams, power: PowerControl, tau: Optional[float] = None) -> float:
    """Success of rank-i devices of class (j, u), pooled over the cluster sizes where they occur."""
    _check_class(j, u)
    table = crs_rank_table(params, power, tau)
    numerator, mass = [], []
    for row, w in zip(table, poisson_pmf([row.K for row in table], params.m_bar)):
        ranks = row.sole_ranks if u == 1 else row.shared_ranks
        if i not in ranks:
            continue
        values = row.sole if u == 1 else (row.first if j == 1 else row.second)
        numerator.append(w * values[ranks.index(i)])
        mass.append(w)
    if not mass:
        return float("nan")
    return math.fsum(numerator) / math.fsum(mass)


def crs_overall_success(params: NetworkParams, power: PowerControl, tau: Optional[float] = None) -> float:
    """Mean success over the devices served in a non-empty cluster.

    Normalized by the mass of the cluster sizes actually summed, 1 <= K <= k_max.
    """
    p_single = _single_device_success(params, power)
    if params.m_bar == 0:
        return p_single
    mass_small, _ = _underloaded_mass(params)
    table = crs_rank_table(params, power, tau)
    weights = poisson_pmf([row.K for row in table], params.m_bar)
    terms = [p_single * mass_small]
    terms.extend(w * row.successes / row.served for row, w in zip(table, weights))
    return math.fsum(terms) / math.fsum([mass_small, *weights])


def crs_avg_served(params: NetworkParams, power: PowerControl, tau: Optional[float] = None) -> float:
    """Mean number of devices decoded successfully per cluster."""
    if params.m_bar == 0:
        return 0.0
    _, mean_small = _underloaded_mass(params)
    table = crs_rank_table(params, power, tau)
    weights = poisson_pmf([row.K for row in table], params.m_bar)
    terms = [_single_device_success(params, power) * mean_small]
    terms.extend(w * row.successes for row, w in zip(table, weights))
    return math.fsum(terms)
