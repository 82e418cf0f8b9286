"""Number of devices allocated per orthogonal channel."""
import logging
import math

import numpy as np
from scipy import special

from src.network.params import NetworkParams, OccupancyPMF
from src.numerics.specfun import regularized_gamma_q
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


def poisson_pmf(k, m_bar: float) -> np.ndarray:
    """Poisson probabilities Pr(K = k), evaluated in log space."""
    k = np.asarray(k, dtype=float)
    return np.exp(special.xlogy(k, m_bar) - m_bar - special.gammaln(k + 1.0))


def poisson_cdf_below(a: int, m_bar: float) -> float:
    """Pr(K < a) for K ~ Poisson(m_bar); zero for a <= 0."""
    return regularized_gamma_q(a, m_bar) if a >= 1 else 0.0


def poisson_partial_mean(a: int, m_bar: float) -> float:
    """E[K; K < a], i.e. sum over k < a of k Pr(K = k)."""
    return m_bar * poisson_cdf_below(a - 1, m_bar)


def conditional_occupancy(k: int, N: int, L: int) -> dict[int, float]:
    """Distribution of the device count on one channel given k devices in the cluster.

    Devices are spread over N channels in round-robin rounds, at most L per
    channel, so channel loads differ by at most one until saturation.
    """
    if k < 0 or N < 1 or L < 1:
        raise DomainError(f"Invalid occupancy arguments k={k}, N={N}, L={L}")
    pmf = {u: 0.0 for u in range(L + 1)}
    if k >= N * L:
        pmf[L] = 1.0
        return pmf
    low, rem = divmod(k, N)
    if rem == 0:
        pmf[low] = 1.0
    else:
        pmf[low] = (N - rem) / N
        pmf[low + 1] = rem / N
    return pmf


def occupancy_pmf(params: NetworkParams) -> OccupancyPMF:
    """Closed-form occupancy distribution c_0..c_L for Poisson(m_bar) cluster sizes.

    Every term is a difference of Poisson partial sums, so large m_bar never
    forms m_bar^k or k! explicitly.
    """
    N, L, m = params.N, params.L, params.m_bar
    F = lambda a: poisson_cdf_below(a, m)
    E = lambda a: poisson_partial_mean(a, m)

    c = []
    for u in range(L):
        # channels whose load rounds down to u
        value = (1 + u) * (F((u + 1) * N) - F(u * N)) - (E((u + 1) * N) - E(u * N)) / N
        if u >= 1:
            # channels whose load rounds up to u
            value += (E(u * N) - E((u - 1) * N + 1)) / N - (u - 1) * (F(u * N) - F((u - 1) * N + 1))
        c.append(value)
    c_sat = (E(L * N) - E((L - 1) * N + 1)) / N - (L - 1) * (F(L * N) - F((L - 1) * N + 1))
    c.append(c_sat + 1.0 - F(L * N))

    c = np.clip(np.asarray(c), 0.0, 1.0)
    c = c / math.fsum(c)
    logger.debug(f"Occupancy PMF for N={N}, L={L}, m_bar={m}: {np.round(c, 6).tolist()}")
    return OccupancyPMF(c=tuple(float(v) for v in c))


def occupancy_pmf_by_mixture(params: NetworkParams, tail: float = 1e-14) -> OccupancyPMF:
    """Occupancy distribution as an explicit Poisson mixture of conditional_occupancy."""
    N, L, m = params.N, params.L, params.m_bar
    k_cut = kmax_for_tail(m, tail) if m > 0 else 0
    weights = poisson_pmf(np.arange(k_cut + 1), m)
    c = np.zeros(L + 1)
    for k, weight in enumerate(weights):
        for u, p in conditional_occupancy(k, N, L).items():
            c[u] += weight * p
    c[L] += 1.0 - math.fsum(weights)
    return OccupancyPMF(c=tuple(float(v) for v in c))


def kmax_for_tail(m_bar: float, tau: float) -> int:
    """Smallest k with Pr(K <= k) > 1 - tau for K ~ Poisson(m_bar)."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"Tail tolerance must lie in (0, 1), got {tau}")
    if m_bar < 0:
        raise DomainError(f"Mean device count must be non-negative, got {m_bar}")
    if m_bar == 0:
        return 0
    upper = int(m_bar + 40.0 * math.sqrt(m_bar) + 60)
    ks = np.arange(upper + 1)
    cdf = special.gammaincc(ks + 1.0, m_bar)
    above = np.flatnonzero(cdf > 1.0 - tau)
    if above.size == 0:
        raise DomainError(f"Tail tolerance {tau} is below floating-point resolution for m_bar={m_bar}")
    return int(above[0])
