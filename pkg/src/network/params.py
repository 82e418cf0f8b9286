"""Scenario parameters and the per-channel occupancy distribution."""
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special


class NetworkParams(BaseModel):
    """Parameters of one clustered uplink aggregation scenario.

    Defaults reproduce the reference setup: m_bar=60, lambda_a=10^-4.4 per m^2,
    R_a=40 m, alpha=3.6, mu=0, theta=1, N=30 channels with up to L=2 devices each.
    """

    model_config = ConfigDict(frozen=True)

    lambda_a: float = Field(default=10 ** -4.4, gt=0, description="aggregator density, per m^2")
    R_a: float = Field(default=40.0, gt=0, description="cluster radius, m")
    alpha: float = Field(default=3.6, gt=2, description="path-loss exponent")
    m_bar: float = Field(default=60.0, ge=0, description="mean devices per aggregator")
    N: int = Field(default=30, ge=1, description="orthogonal channels per aggregator")
    L: int = Field(default=2, ge=1, description="maximum devices per channel")
    theta: float = Field(default=1.0, gt=0, description="SIR threshold, linear")
    mu: float = Field(default=0.0, ge=0, le=1, description="SIC imperfection")
    rho: float = Field(default=1.0, gt=0, description="receiver sensitivity, W")
    beta0: float = Field(default=0.5, ge=0, le=1)
    beta1: float = Field(default=0.5, ge=0, le=1)
    delta: float = Field(default=1.0, gt=0, description="NOMA power budget a_i + b_i")

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "NetworkParams":
        if abs(self.beta0 + self.beta1 - 1.0) > 1e-12:
            raise ValueError(f"beta0 + beta1 must equal 1, got {self.beta0 + self.beta1}")
        return self

    @property
    def chi(self) -> float:
        """Stable-law scale 1/2 lambda_a pi R_a^2 Gamma(1+2/alpha) Gamma(1-2/alpha)."""
        t = 2.0 / self.alpha
        return 0.5 * self.lambda_a * math.pi * self.R_a ** 2 * float(special.gamma(1.0 + t) * special.gamma(1.0 - t))

    @property
    def psi(self) -> float:
        """Mean channel-inversion transmit power rho * E[r_a^alpha] of one device."""
        return 2.0 * self.rho * self.R_a ** self.alpha / (self.alpha + 2.0)


class OccupancyPMF(BaseModel):
    """Distribution c_0..c_L of the number of devices sharing one channel."""

    model_config = ConfigDict(frozen=True)

    c: tuple[float, ...]

    @model_validator(mode="after")
    def _is_distribution(self) -> "OccupancyPMF":
        if len(self.c) < 2:
            raise ValueError("occupancy PMF needs at least c_0 and c_1")
        if any(not 0.0 <= value <= 1.0 for value in self.c):
            raise ValueError(f"occupancy probabilities must lie in [0, 1], got {self.c}")
        if abs(math.fsum(self.c) - 1.0) > 1e-12:
            raise ValueError(f"occupancy probabilities must sum to 1, got {math.fsum(self.c)}")
        return self

    @property
    def L(self) -> int:
        return len(self.c) - 1

    @property
    def c_bar(self) -> float:
        """Mean number of active devices per channel."""
        return math.fsum(u * value for u, value in enumerate(self.c))

    def get(self, u: int) -> float:
        return self.c[u] if 0 <= u < len(self.c) else 0.0
