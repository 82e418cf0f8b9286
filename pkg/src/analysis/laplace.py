"""Laplace transform of the inter-cluster interference at the typical aggregator."""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.network.occupancy import occupancy_pmf
from src.network.params import NetworkParams, OccupancyPMF
from src.numerics.specfun import (
    DEFAULT_1D,
    DEFAULT_2D,
    QuadratureSpec,
    integrate_2d_polar,
    integrate_semi_infinite,
)
from src.utils.config import get_config
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


class LaplaceVariant(str, Enum):
    RRS_EXACT = "rrs_exact"
    RRS_UPPER = "rrs_upper"
    RRS_LOWER = "rrs_lower"
    RRS_WEIGHTED = "rrs_weighted"
    CRS_WEIGHTED = "crs_weighted"
    CRS_EXACT_FIXED_MARKS = "crs_exact_fixed_marks"


RRS_VARIANTS = (
    LaplaceVariant.RRS_EXACT,
    LaplaceVariant.RRS_UPPER,
    LaplaceVariant.RRS_LOWER,
    LaplaceVariant.RRS_WEIGHTED,
)


@dataclass(frozen=True)
class LaplaceModel:
    """Which transform to evaluate, for which network and occupancy.

    The fixed-mark exact CRS transform is a slow triple quadrature; it is only
    available on models built with ``reference=True``. ``mark`` is the weight
    a_i of the first device on shared interfering channels, the sharer using
    delta - a_i.
    """

    variant: LaplaceVariant
    params: NetworkParams
    pmf: OccupancyPMF
    quad_1d: QuadratureSpec = DEFAULT_1D
    quad_2d: QuadratureSpec = DEFAULT_2D
    reference: bool = False
    mark: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "variant", LaplaceVariant(self.variant))
        if self.variant is LaplaceVariant.CRS_EXACT_FIXED_MARKS:
            if not self.reference:
                raise DomainError("The fixed-mark exact transform requires a reference model (reference=True)")
            if self.mark is None or self.mark <= 0:
                raise DomainError(f"The fixed-mark exact transform needs a positive mark, got {self.mark}")
        if self.variant in (LaplaceVariant.CRS_WEIGHTED, LaplaceVariant.CRS_EXACT_FIXED_MARKS) and self.pmf.L > 2:
            raise DomainError(f"Channel-aware transforms support L <= 2, got L={self.pmf.L}")

    @classmethod
    def build(
        cls,
        params: NetworkParams,
        variant: LaplaceVariant = LaplaceVariant.RRS_WEIGHTED,
        pmf: Optional[OccupancyPMF] = None,
        **kwargs,
    ) -> "LaplaceModel":
        settings = get_config()
        kwargs.setdefault("quad_1d", QuadratureSpec.from_settings(settings))
        kwargs.setdefault("quad_2d", QuadratureSpec.from_settings(settings, two_dimensional=True))
        return cls(variant, params, occupancy_pmf(params) if pmf is None else pmf, **kwargs)

    @property
    def chi(self) -> float:
        return self.params.chi


def upsilon_complement(r_w: float, s: float, params: NetworkParams, spec: QuadratureSpec = DEFAULT_2D) -> float:
    """1 - Upsilon(r_w, s): mean blocked fraction of one device of a cluster at distance r_w.

    Evaluated directly rather than as 1 - Upsilon so that far clusters keep
    their relative accuracy.
    """
    if s == 0.0:
        return 0.0
    alpha, R_a = params.alpha, params.R_a

    def blocked(r: float, omega: float) -> float:
        near = s * r ** alpha
        if near == 0.0:
            return 0.0
        far = max(r_w * r_w + r * r + 2.0 * r_w * r * math.cos(omega), 0.0) ** (alpha / 2.0)
        return r * near / (far + near)

    return integrate_2d_polar(blocked, R_a, spec, symmetric_in_angle=True) / (math.pi * R_a ** 2)


def upsilon(r_w: float, s: float, params: NetworkParams, spec: QuadratureSpec = DEFAULT_2D) -> float:
    """Upsilon(r_w, s) = E[exp(-s g r_a^alpha / |x + y|^alpha)] for one interfering device."""
    return 1.0 - upsilon_complement(r_w, s, params, spec)


def _loss(w: float, u: int) -> float:
    """1 - (1 - w)^u for w in [0, 1]."""
    if w >= 1.0:
        return 1.0
    return -math.expm1(u * math.log1p(-w))


def _exact_exponent(model: LaplaceModel, integrand_loss) -> float:
    params = model.params
    value = integrate_semi_infinite(
        lambda r_w: -r_w * integrand_loss(r_w),
        model.quad_1d,
        breakpoints=(params.R_a, 2.0 * params.R_a),
    )
    return 2.0 * math.pi * params.lambda_a * value


def stable_exponents(model: LaplaceModel, delta: Optional[float] = None) -> list[tuple[float, float]]:
    """(weight, nu) pairs such that the weighted transform is sum of weight * exp(-nu s^(2/alpha)).

    RRS variants ignore ``delta``; channel-aware variants use the power budget
    delta of the shared channels.
    """
    params, pmf, chi = model.params, model.pmf, model.chi
    alpha = params.alpha
    if model.variant in RRS_VARIANTS:
        upper = chi * math.fsum(c_u * u ** (2.0 / alpha) for u, c_u in enumerate(pmf.c))
        lower = chi * pmf.c_bar
        return [(params.beta0, upper), (params.beta1, lower)]
    delta = params.delta if delta is None else delta
    c1, c2 = pmf.get(1), pmf.get(2)
    return [
        (params.beta0, chi * (c1 + c2 * delta ** (2.0 / alpha))),
        (params.beta1, chi * (c1 + c2 * 2.0 ** ((alpha - 2.0) / alpha) * delta ** (2.0 / alpha))),
    ]


def laplace_rrs(model: LaplaceModel, s: float) -> float:
    """Interference transform under random scheduling, for the model's variant."""
    if model.variant not in RRS_VARIANTS:
        raise DomainError(f"laplace_rrs needs an RRS variant, got {model.variant.value}")
    if s < 0:
        raise DomainError(f"Laplace argument must be non-negative, got {s}")
    if s == 0.0:
        return 1.0

    alpha = model.params.alpha
    (beta0, nu_upper), (beta1, nu_lower) = stable_exponents(model)
    scale = s ** (2.0 / alpha)
    if model.variant is LaplaceVariant.RRS_UPPER:
        return math.exp(-nu_upper * scale)
    if model.variant is LaplaceVariant.RRS_LOWER:
        return math.exp(-nu_lower * scale)
    if model.variant is LaplaceVariant.RRS_WEIGHTED:
        return beta0 * math.exp(-nu_upper * scale) + beta1 * math.exp(-nu_lower * scale)

    c = model.pmf.c

    def loss(r_w: float) -> float:
        w = upsilon_complement(r_w, s, model.params, model.quad_2d)
        return math.fsum(c_u * _loss(w, u) for u, c_u in enumerate(c) if u and c_u)

    try:
        return math.exp(_exact_exponent(model, loss))
    except Exception as e:
        logger.error(f"Exact RRS transform failed at s={s}: {e}")
        raise


def laplace_crs(model: LaplaceModel, s: float, delta: float) -> float:
    """Interference transform under channel-aware scheduling with power budget ``delta``."""
    if s < 0 or not delta > 0:
        raise DomainError(f"laplace_crs requires s >= 0 and delta > 0, got s={s}, delta={delta}")
    if s == 0.0:
        return 1.0

    if model.variant is LaplaceVariant.CRS_WEIGHTED:
        scale = s ** (2.0 / model.params.alpha)
        return math.fsum(beta * math.exp(-nu * scale) for beta, nu in stable_exponents(model, delta))

    if model.variant is not LaplaceVariant.CRS_EXACT_FIXED_MARKS:
        raise DomainError(f"laplace_crs needs a CRS variant, got {model.variant.value}")
    a = model.mark
    if not a < delta:
        raise DomainError(f"Mark {a} must be below the power budget {delta}")
    c1, c2 = model.pmf.get(1), model.pmf.get(2)
    params, spec = model.params, model.quad_2d

    def loss(r_w: float) -> float:
        total = 0.0
        if c1:
            total += c1 * upsilon_complement(r_w, s, params, spec)
        if c2:
            w_a = upsilon_complement(r_w, a * s, params, spec)
            w_b = upsilon_complement(r_w, (delta - a) * s, params, spec)
            total += c2 * (w_a + w_b - w_a * w_b)
        return total

    logger.info(f"Evaluating fixed-mark reference transform at s={s}, delta={delta}, a={a}")
    return math.exp(_exact_exponent(model, loss))
