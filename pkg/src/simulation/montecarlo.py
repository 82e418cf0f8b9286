"""Monte Carlo simulator of the clustered uplink network.

Each run draws a fresh Matern-cluster realization around a typical
aggregator at the window centre, schedules every cluster, and records the
post-SIC SIR of the typical cluster's devices. Runs are seeded from
(seed, run index) so results do not depend on how runs are split across
worker processes.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import repeat
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.analysis.metrics import Scheme
from src.analysis.report import Z_95, Estimate, MetricReport
from src.network.params import NetworkParams
from src.network.scheduling import Assignment, PowerControl, crs_assign, rrs_assign
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


class SimConfig(BaseModel):
    """Run count, window sizing, seeding and scheme of one simulation."""

    model_config = ConfigDict(frozen=True)

    runs: int = Field(default=50000, ge=1)
    expected_aggregators: float = Field(default=400.0, gt=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    scheme: Scheme = Scheme.RRS
    record_per_rank: bool = False
    power_split: float = Field(default=0.5, gt=0, lt=1)
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=500, ge=1)

    def window_side(self, params: NetworkParams) -> float:
        """Side of the square window holding expected_aggregators aggregators on average."""
        side = math.sqrt(self.expected_aggregators / params.lambda_a)
        if side ** 2 <= math.pi * (2.0 * params.R_a) ** 2:
            raise DomainError(f"Window area {side ** 2:.3g} m^2 is too small for clusters of radius {params.R_a} m")
        return side


@dataclass
class Realization:
    """One network snapshot as seen from the typical aggregator at the origin.

    Interfering devices are flattened across clusters; ``channel`` is -1 for
    devices left unscheduled by their own aggregator.
    """

    aggregators: np.ndarray
    counts: np.ndarray
    distance: np.ndarray
    r_a: np.ndarray
    g: np.ndarray
    channel: np.ndarray
    weight: np.ndarray
    typical_r_a: np.ndarray
    typical_h: np.ndarray

    @property
    def K(self) -> int:
        return int(self.typical_h.size)


@dataclass(frozen=True)
class SirSample:
    device: int
    channel: int
    j: int
    u: int
    rank: int
    sir: float
    success: bool
    power: float


def _uniform_in_disc(R_a: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Distances to the disc centre with density 2r / R_a^2."""
    return R_a * np.sqrt(rng.random(size))


def _schedule_interferers(
    counts: np.ndarray,
    params: NetworkParams,
    scheme: Scheme,
    power: Optional[PowerControl],
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Channel and power weight of every interfering device.

    Offsets and cross gains do not depend on own-link fading, so a device's
    slot within its cluster stands in for its fading rank. Slot p is served on
    the cluster's channel perm[p mod N] while p < N * L.
    """
    N, L = params.N, params.L
    M = counts.size
    starts = np.cumsum(counts) - counts
    owner = np.repeat(np.arange(M), counts)
    slot = np.arange(owner.size) - np.repeat(starts, counts)
    perms = np.argsort(rng.random((M, N)), axis=1)

    scheduled = slot < N * L
    channel = np.where(scheduled, perms[owner, slot % N], -1)
    weight = scheduled.astype(float)

    if scheme.channel_aware and L == 2:
        sizes = counts[owner]
        for k in np.unique(counts[counts > N]):
            a, b = power.coefficients(int(k))
            shared = min(int(k) - N, N)
            first = (sizes == k) & (slot < shared)
            weight[first] = a[slot[first]]
            second = (sizes == k) & (slot >= N) & (slot < N + shared)
            weight[second] = b[slot[second] - N]
    return channel, weight


def sample_realization(
    params: NetworkParams,
    config: SimConfig,
    rng: np.random.Generator,
    power: Optional[PowerControl] = None,
) -> Realization:
    """Draw interfering clusters in the window plus the typical cluster's devices."""
    side = config.window_side(params)
    M = int(rng.poisson(params.lambda_a * side ** 2))
    aggregators = rng.uniform(-side / 2.0, side / 2.0, size=(M, 2))
    counts = rng.poisson(params.m_bar, size=M)

    D = int(counts.sum())
    r_a = _uniform_in_disc(params.R_a, D, rng)
    angle = rng.uniform(0.0, 2.0 * math.pi, D)
    owner = np.repeat(np.arange(M), counts)
    x = aggregators[owner, 0] + r_a * np.cos(angle)
    y = aggregators[owner, 1] + r_a * np.sin(angle)
    g = rng.exponential(size=D)
    channel, weight = _schedule_interferers(counts, params, config.scheme, power, rng)

    K0 = int(rng.poisson(params.m_bar))
    return Realization(
        aggregators=aggregators,
        counts=counts,
        distance=np.hypot(x, y),
        r_a=r_a,
        g=g,
        channel=channel,
        weight=weight,
        typical_r_a=_uniform_in_disc(params.R_a, K0, rng),
        typical_h=rng.exponential(size=K0),
    )


def assign_typical(
    realization: Realization,
    params: NetworkParams,
    scheme: Scheme,
    power: Optional[PowerControl],
    rng: np.random.Generator,
) -> Assignment:
    if scheme.channel_aware:
        return crs_assign(realization.typical_h, params.N, params.L, power)
    return rrs_assign(realization.K, params.N, params.L, rng)


def channel_interference(realization: Realization, params: NetworkParams) -> np.ndarray:
    """Normalized inter-cluster interference sum of w g r_a^alpha |x + y|^-alpha per channel."""
    active = realization.channel >= 0
    with np.errstate(divide="ignore", over="ignore"):
        received = realization.weight * realization.g * (realization.r_a / realization.distance) ** params.alpha
    return np.bincount(realization.channel[active], weights=received[active], minlength=params.N)


def evaluate_sir(
    realization: Realization,
    assignment: Assignment,
    params: NetworkParams,
    scheme: Scheme,
) -> list[SirSample]:
    """Post-SIC SIR of every scheduled device of the typical cluster.

    The j-th decoded device sees the inter-cluster interference, the devices
    decoded after it at full strength, and a fraction mu of those already
    cancelled. Random scheduling decodes in decreasing instantaneous gain,
    channel-aware scheduling in rank order.
    """
    interference = channel_interference(realization, params)
    h, weight = realization.typical_h, assignment.weight
    samples = []
    for n, devices in enumerate(assignment.channels):
        if not devices:
            continue
        devices = list(devices)
        if not scheme.channel_aware:
            devices.sort(key=lambda d: (-h[d], d))
        signal = np.array([weight[d] * h[d] for d in devices])
        u = len(devices)
        for j, device in enumerate(devices, start=1):
            later = math.fsum(signal[j:])
            cancelled = math.fsum(signal[:j - 1])
            with np.errstate(divide="ignore"):
                sir = float(np.divide(signal[j - 1], interference[n] + later + params.mu * cancelled))
            samples.append(SirSample(
                device=device,
                channel=n,
                j=j,
                u=u,
                rank=int(assignment.rank[device]),
                sir=sir,
                success=sir >= params.theta,
                power=params.rho * weight[device] * realization.typical_r_a[device] ** params.alpha,
            ))
    return samples


@dataclass
class _Tally:
    """Partial sums of one chunk of runs; merging keeps chunk order."""

    L: int
    hits: dict = field(default_factory=dict)
    trials: dict = field(default_factory=dict)
    rank_hits: dict = field(default_factory=dict)
    rank_trials: dict = field(default_factory=dict)
    channel_success_sums: list = field(default_factory=list)
    active_channels: list = field(default_factory=list)
    served_means: list = field(default_factory=list)
    successes: list = field(default_factory=list)
    power: list = field(default_factory=list)
    occupancy: list = field(default_factory=list)

    def add_run(self, samples: list[SirSample], assignment: Assignment, N: int, record_per_rank: bool):
        per_channel: dict[int, list[bool]] = {}
        for sample in samples:
            key = (sample.j, sample.u)
            self.trials[key] = self.trials.get(key, 0) + 1
            self.hits[key] = self.hits.get(key, 0) + int(sample.success)
            if record_per_rank and sample.rank:
                shared_rank = sample.rank if sample.j == 1 else sample.rank - N
                rank_key = (sample.j, sample.u, shared_rank)
                self.rank_trials[rank_key] = self.rank_trials.get(rank_key, 0) + 1
                self.rank_hits[rank_key] = self.rank_hits.get(rank_key, 0) + int(sample.success)
            per_channel.setdefault(sample.channel, []).append(sample.success)

        self.channel_success_sums.append(math.fsum(sum(flags) / len(flags) for flags in per_channel.values()))
        self.active_channels.append(len(per_channel))
        if samples:
            self.served_means.append(sum(s.success for s in samples) / len(samples))
        self.successes.append(sum(s.success for s in samples))
        self.power.append(math.fsum(s.power for s in samples) / N)
        self.occupancy.append(np.bincount(assignment.occupancy, minlength=self.L + 1) / N)

    def merge(self, other: "_Tally") -> "_Tally":
        for name in ("hits", "trials", "rank_hits", "rank_trials"):
            mine = getattr(self, name)
            for key, value in getattr(other, name).items():
                mine[key] = mine.get(key, 0) + value
        for name in ("channel_success_sums", "active_channels", "served_means", "successes", "power", "occupancy"):
            getattr(self, name).extend(getattr(other, name))
        return self


def _ratio_estimate(numerators: list, denominators: list) -> Estimate:
    """Pooled ratio sum(num)/sum(den) with a run-clustered normal interval."""
    total = sum(denominators)
    if total == 0:
        return Estimate(math.nan)
    ratio = math.fsum(numerators) / total
    n = len(numerators)
    if n < 2:
        return Estimate(ratio, samples=total)
    mean_den = total / n
    residuals = [num - ratio * den for num, den in zip(numerators, denominators)]
    variance = math.fsum(r * r for r in residuals) / (n - 1)
    half = Z_95 * math.sqrt(variance / n) / mean_den
    return Estimate(ratio, ratio - half, ratio + half, total)


def _run_seed(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run,)))


def _simulate_chunk(params: NetworkParams, config: SimConfig, start: int, stop: int) -> _Tally:
    power = config.scheme.power_control(params, config.power_split)
    tally = _Tally(L=params.L)
    for run in range(start, stop):
        rng = _run_seed(config.seed, run)
        realization = sample_realization(params, config, rng, power)
        assignment = assign_typical(realization, params, config.scheme, power, rng)
        samples = evaluate_sir(realization, assignment, params, config.scheme)
        tally.add_run(samples, assignment, params.N, config.record_per_rank)
    logger.debug(f"Simulated runs [{start}, {stop})")
    return tally


def estimate_metrics(params: NetworkParams, config: SimConfig) -> MetricReport:
    """Estimate every metric of ``config.scheme`` from ``config.runs`` independent runs."""
    params = config.scheme.resolve_params(params)
    config.window_side(params)
    starts = list(range(0, config.runs, config.chunk_size))
    stops = [min(s + config.chunk_size, config.runs) for s in starts]
    logger.info(
        f"Simulating {config.runs} runs of scheme={config.scheme.value} "
        f"(N={params.N}, L={params.L}, m_bar={params.m_bar}) on {config.workers} worker(s)"
    )

    if config.workers == 1:
        tallies = [_simulate_chunk(params, config, s, e) for s, e in zip(starts, stops)]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            tallies = list(pool.map(_simulate_chunk, repeat(params), repeat(config), starts, stops))
    tally = reduce(_Tally.merge, tallies)

    success = {key: Estimate.frequency(tally.hits[key], tally.trials[key]) for key in sorted(tally.trials)}
    per_rank = {
        key: Estimate.frequency(tally.rank_hits[key], tally.rank_trials[key]) for key in sorted(tally.rank_trials)
    }
    if config.scheme.channel_aware:
        overall = Estimate.mean(tally.served_means)
    else:
        overall = _ratio_estimate(tally.channel_success_sums, tally.active_channels)
    occupancy = np.vstack(tally.occupancy)

    logger.info(f"Simulation finished: overall success {overall.value:.4f}")
    return MetricReport(
        scheme=config.scheme.value,
        source="simulated",
        success=success,
        overall_success=overall,
        avg_served=Estimate.mean(tally.successes),
        avg_power=Estimate.mean(tally.power),
        occupancy={u: Estimate.mean(occupancy[:, u]) for u in range(params.L + 1)},
        per_rank=per_rank,
        runs=config.runs,
        seed=config.seed,
    )
