"""Metric reports shared by the analytic and simulated evaluations."""
import math
from dataclasses import dataclass, field
from typing import Optional

import pandas as pd

# two-sided 95% normal quantile
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class Estimate:
    """A metric value with an optional 95% confidence interval."""

    value: float
    ci_low: float = math.nan
    ci_high: float = math.nan
    samples: int = 0

    @classmethod
    def exact(cls, value: float) -> "Estimate":
        return cls(float(value))

    @classmethod
    def frequency(cls, hits: int, trials: int) -> "Estimate":
        """Wald interval for a success frequency."""
        if trials == 0:
            return cls(math.nan)
        p = hits / trials
        half = Z_95 * math.sqrt(p * (1.0 - p) / trials)
        return cls(p, p - half, p + half, trials)

    @classmethod
    def mean(cls, values) -> "Estimate":
        """Normal-approximation interval for the mean of independent samples."""
        values = [float(v) for v in values]
        n = len(values)
        if n == 0:
            return cls(math.nan)
        centre = math.fsum(values) / n
        if n == 1:
            return cls(centre, math.nan, math.nan, 1)
        variance = math.fsum((v - centre) ** 2 for v in values) / (n - 1)
        half = Z_95 * math.sqrt(variance / n)
        return cls(centre, centre - half, centre + half, n)


@dataclass
class MetricReport:
    """All metrics of one scheme at one parameter point.

    ``success`` is keyed by (j, u): decode order and channel occupancy.
    ``per_rank`` is keyed by (j, u, i) with i the channel's fading rank.
    """

    scheme: str
    source: str
    success: dict[tuple[int, int], Estimate]
    overall_success: Estimate
    avg_served: Estimate
    avg_power: Estimate
    occupancy: dict[int, Estimate] = field(default_factory=dict)
    per_rank: dict[tuple[int, int, int], Estimate] = field(default_factory=dict)
    runs: int = 0
    seed: Optional[int] = None

    def to_frame(self) -> pd.DataFrame:
        """One row per metric with columns metric, j, u, i, value, ci_low, ci_high, samples."""
        rows = []

        def add(metric, estimate, j=None, u=None, i=None):
            rows.append({
                "metric": metric,
                "j": j,
                "u": u,
                "i": i,
                "value": estimate.value,
                "ci_low": estimate.ci_low,
                "ci_high": estimate.ci_high,
                "samples": estimate.samples,
            })

        for (j, u), estimate in sorted(self.success.items()):
            add("success", estimate, j, u)
        for (j, u, i), estimate in sorted(self.per_rank.items()):
            add("rank_success", estimate, j, u, i)
        add("overall_success", self.overall_success)
        add("avg_served", self.avg_served)
        add("avg_power", self.avg_power)
        for u, estimate in sorted(self.occupancy.items()):
            add("occupancy", estimate, u=u)

        frame = pd.DataFrame(rows)
        frame[["j", "u", "i"]] = frame[["j", "u", "i"]].astype("Int64")
        frame.insert(0, "scheme", self.scheme)
        frame.insert(1, "source", self.source)
        return frame
