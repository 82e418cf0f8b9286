"""Channel assignment, NOMA power coefficients and the coexistence budget."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from src.network.occupancy import occupancy_pmf
from src.network.params import NetworkParams
from src.numerics.specfun import digamma
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass
class Assignment:
    """Devices of one cluster placed on its N channels.

    ``channels[n]`` lists device indices in decode order for channel-aware
    scheduling; random scheduling records the co-channel set only and the
    decode order follows the instantaneous gains.
    """

    channels: list[list[int]]
    channel_of: np.ndarray
    rank: np.ndarray
    weight: np.ndarray = field(repr=False)

    @property
    def occupancy(self) -> np.ndarray:
        return np.array([len(devices) for devices in self.channels], dtype=int)

    @property
    def served(self) -> np.ndarray:
        return np.flatnonzero(self.channel_of >= 0)


def rrs_assign(K: int, N: int, L: int, rng: np.random.Generator) -> Assignment:
    """Random scheduling: one-to-one random matchings of devices to channels, round by round."""
    if K < 0:
        raise DomainError(f"Device count must be non-negative, got {K}")
    order = rng.permutation(K)
    channels: list[list[int]] = [[] for _ in range(N)]
    channel_of = np.full(K, -1, dtype=int)
    placed = min(K, N * L)
    for start in range(0, placed, N):
        batch = order[start:min(start + N, placed)]
        picks = rng.permutation(N)[:len(batch)]
        for device, channel in zip(batch, picks):
            channels[channel].append(int(device))
            channel_of[device] = channel
    weight = (channel_of >= 0).astype(float)
    return Assignment(channels, channel_of, np.zeros(K, dtype=int), weight)


class PowerRule(str, Enum):
    FIXED = "fixed"
    EQUAL_RELIABILITY = "equal_reliability"


@lru_cache(maxsize=4096)
def _equal_reliability_split(K: int, N: int, theta: float, mu: float, delta: float) -> tuple[float, ...]:
    shared = min(K - N, N)
    return tuple(power_coefficients(i, K, N, theta, mu, delta)[0] for i in range(1, shared + 1))


@dataclass(frozen=True)
class PowerControl:
    """Power weights (a_i, b_i = delta - a_i) for the devices sharing rank-i channels.

    With ``rule=FIXED`` every rank uses a_i = split * delta. With
    ``rule=EQUAL_RELIABILITY`` a_i equalizes the mean reliability of both sharers and
    therefore depends on the cluster's device count K.
    """

    delta: float
    N: int
    rule: PowerRule = PowerRule.FIXED
    split: float = 0.5
    theta: float = 1.0
    mu: float = 0.0
    delta_star: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rule", PowerRule(self.rule))
        if not self.delta > 0:
            raise DomainError(f"Power budget must be positive, got {self.delta}")
        if not 0.0 < self.split < 1.0:
            raise DomainError(f"Power split must lie in (0, 1), got {self.split}")

    @classmethod
    def from_params(
        cls,
        params: NetworkParams,
        rule: PowerRule = PowerRule.FIXED,
        split: float = 0.5,
        delta_star: Optional[float] = None,
    ) -> "PowerControl":
        return cls(
            delta=params.delta,
            N=params.N,
            rule=PowerRule(rule),
            split=split,
            theta=params.theta,
            mu=params.mu,
            delta_star=delta_star,
        )

    def coefficients(self, K: int) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (a, b) indexed by rank - 1 for the channels shared when K devices compete."""
        shared = max(0, min(K - self.N, self.N))
        if self.rule is PowerRule.EQUAL_RELIABILITY and shared:
            a = np.array(_equal_reliability_split(K, self.N, self.theta, self.mu, self.delta))
        else:
            a = np.full(shared, self.split * self.delta)
        return a, self.delta - a


def crs_assign(
    gains,
    N: int,
    L: int = 2,
    power: Optional[PowerControl] = None,
) -> Assignment:
    """Channel-aware scheduling: the N strongest devices take one channel each by rank,
    the next N pair up with them in the same rank order.

    Sharers transmit with weights (a_i, b_i) from ``power``; without a power
    policy every device uses weight 1.
    """
    if L > 2:
        raise DomainError(f"Channel-aware scheduling supports at most two devices per channel, got L={L}")
    gains = np.asarray(gains, dtype=float)
    K = gains.size
    # descending gain, ties by ascending device index
    order = np.lexsort((np.arange(K), -gains))
    rank = np.empty(K, dtype=int)
    rank[order] = np.arange(1, K + 1)

    channels: list[list[int]] = [[] for _ in range(N)]
    channel_of = np.full(K, -1, dtype=int)
    weight = np.zeros(K)
    for i, device in enumerate(order[:min(K, N)]):
        channels[i].append(int(device))
        channel_of[device] = i
        weight[device] = 1.0

    shared = max(0, min(K - N, N)) if L == 2 else 0
    if shared:
        a, b = power.coefficients(K) if power is not None else (np.ones(shared), np.ones(shared))
        for i in range(shared):
            first, second = order[i], order[N + i]
            channels[i].append(int(second))
            channel_of[second] = i
            weight[first], weight[second] = a[i], b[i]
    return Assignment(channels, channel_of, rank, weight)


def power_coefficients(i: int, K: int, N: int, theta: float, mu: float, delta: float) -> tuple[float, float]:
    """Split (a_i, b_i) that equalizes the mean decoding margins of both devices on rank-i channel."""
    if not (1 <= i <= N and K > N and theta > 0 and 0 <= mu < 1 and delta > 0):
        raise DomainError(f"Invalid power-coefficient arguments i={i}, K={K}, N={N}, theta={theta}, mu={mu}, delta={delta}")
    psi_k, psi_i, psi_in = digamma(K + 1), digamma(i), digamma(i + N)
    numerator = delta * (1.0 + 1.0 / theta) * (psi_k - psi_in)
    denominator = (1.0 + mu + 2.0 / theta) * psi_k - (mu + 1.0 / theta) * psi_i - (1.0 + 1.0 / theta) * psi_in
    if denominator <= 0:
        logger.error(f"Infeasible power split for i={i}, K={K}, N={N}, theta={theta}, mu={mu}")
        raise DomainError(f"Power-coefficient denominator {denominator:.3e} is not positive")
    a = numerator / denominator
    return a, delta - a


class CoexistenceBudget(NamedTuple):
    value: float
    degenerate: bool
    residual: float


def coexistence_residual(delta: float, kappa: float, alpha: float) -> float:
    """xi^(delta^(2/alpha) - 1) + xi^(2^((alpha-2)/alpha) delta^(2/alpha) - 1) - 2 with xi = exp(-kappa)."""
    e = delta ** (2.0 / alpha)
    return math.expm1(-(e - 1.0) * kappa) + math.expm1(-(2.0 ** ((alpha - 2.0) / alpha) * e - 1.0) * kappa)


def delta_star(
    params: NetworkParams,
    s: Optional[float] = None,
    c2: Optional[float] = None,
) -> CoexistenceBudget:
    """Power budget under which shared channels interfere like single-device channels.

    Evaluated at Laplace argument ``s`` (default theta) with sharing probability
    ``c2`` (default from the scenario's occupancy). Assumes equal approximation
    weights beta0 = beta1 = 0.5.
    """
    s = params.theta if s is None else s
    c2 = occupancy_pmf(params).get(2) if c2 is None else c2
    if not (s > 0 and 0.0 <= c2 <= 1.0):
        raise DomainError(f"delta_star requires s > 0 and c2 in [0, 1], got s={s}, c2={c2}")

    alpha = params.alpha
    lo, hi = 2.0 ** ((2.0 - alpha) / 2.0), 1.0
    kappa = params.chi * c2 * s ** (2.0 / alpha)
    r_lo, r_hi = coexistence_residual(lo, kappa, alpha), coexistence_residual(hi, kappa, alpha)
    if not (r_lo > 0.0 > r_hi):
        mid = 0.5 * (lo + hi)
        logger.warning(f"Coexistence residual has no sign change on [{lo:.4f}, {hi:.4f}] (c2={c2}); using midpoint")
        return CoexistenceBudget(mid, True, coexistence_residual(mid, kappa, alpha))

    root = optimize.brentq(coexistence_residual, lo, hi, args=(kappa, alpha), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    residual = coexistence_residual(root, kappa, alpha)
    logger.info(f"delta* = {root:.6f} (alpha={alpha}, s={s}, c2={c2:.4f}, residual={residual:.1e})")
    return CoexistenceBudget(root, False, residual)
