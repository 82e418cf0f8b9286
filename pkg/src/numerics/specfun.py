"""Special functions and quadrature kernels used by the analytic metrics.

All routines are pure functions of their arguments and may be called from
any number of threads.
"""
import logging
import math
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, optimize, special

from src.utils.errors import AccuracyError, DomainError

logger = logging.getLogger(__name__)

# An integral is accepted when QUADPACK's error estimate is within this factor
# of the requested tolerance, even if it flagged a roundoff or subdivision limit.
_ACCEPT_FACTOR = 1e3


class QuadratureSpec(BaseModel):
    """Tolerances for one family of quadratures."""

    model_config = ConfigDict(frozen=True)

    relative_tolerance: float = Field(default=1e-8, gt=0)
    absolute_tolerance: float = Field(default=1e-12, gt=0)
    max_subdivisions: int = Field(default=200, ge=1)
    oscillatory_cutoff_tolerance: float = Field(default=1e-9, gt=0)

    @classmethod
    def from_settings(cls, settings, two_dimensional: bool = False) -> "QuadratureSpec":
        """Build a spec from process settings (see ``src.utils.config``)."""
        return cls(
            relative_tolerance=settings.QUAD_REL_TOL_2D if two_dimensional else settings.QUAD_REL_TOL_1D,
            max_subdivisions=settings.QUAD_MAX_SUBDIVISIONS,
            oscillatory_cutoff_tolerance=settings.OSC_CUTOFF,
        )


DEFAULT_1D = QuadratureSpec()
DEFAULT_2D = QuadratureSpec(relative_tolerance=1e-6)


def digamma(x: float) -> float:
    """Digamma function psi(x) for x > 0."""
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"digamma requires a finite x > 0, got {x}")
    return float(special.digamma(x))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x).

    For integer ``a = k + 1`` this is the Poisson CDF ``Pr(K <= k)`` with mean ``x``.
    """
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"Q(a, x) requires a > 0, got a={a}")
    if not (x >= 0):
        raise DomainError(f"Q(a, x) requires x >= 0, got x={x}")
    return float(special.gammaincc(a, x))


def _quad(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec,
    epsabs: float | None = None,
    **kwargs,
) -> float:
    """Adaptive QUADPACK integral mapping failure codes onto our exceptions."""
    epsabs = spec.absolute_tolerance if epsabs is None else epsabs
    out = integrate.quad(
        f,
        a,
        b,
        epsabs=epsabs,
        epsrel=spec.relative_tolerance,
        limit=spec.max_subdivisions,
        full_output=1,
        **kwargs,
    )
    value, error = float(out[0]), float(out[1])
    if len(out) > 3:
        message = out[3]
        if "divergent" in message:
            raise DomainError(f"Integral over [{a}, {b}] appears divergent: {message}")
        target = max(epsabs, spec.relative_tolerance * abs(value))
        if not math.isfinite(value) or error > _ACCEPT_FACTOR * target:
            raise AccuracyError(
                f"Quadrature over [{a}, {b}] did not converge: {message}", value, error
            )
        logger.debug(f"Accepted quadrature over [{a}, {b}] with error {error:.2e}: {message}")
    return value


def integrate_2d_polar(
    f: Callable[[float, float], float],
    R_a: float,
    spec: QuadratureSpec = DEFAULT_2D,
    symmetric_in_angle: bool = False,
) -> float:
    """Integrate ``f(r, omega)`` over the disc r in [0, R_a], omega in [0, 2*pi].

    ``f`` is expected to include the polar Jacobian ``r`` itself. When the
    integrand depends on omega only through cos(omega), pass
    ``symmetric_in_angle=True`` to integrate over [0, pi] and double.
    """
    if not R_a > 0:
        raise DomainError(f"Disc radius must be positive, got {R_a}")
    upper = math.pi if symmetric_in_angle else 2.0 * math.pi

    def radial(r: float) -> float:
        return _quad(lambda omega: f(r, omega), 0.0, upper, spec)

    total = _quad(radial, 0.0, R_a, spec)
    return 2.0 * total if symmetric_in_angle else total


def integrate_semi_infinite(
    f: Callable[[float], float],
    spec: QuadratureSpec = DEFAULT_1D,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over [0, inf).

    The last breakpoint separates a finite head (where the listed breakpoints
    mark known kinks) from the infinite tail, which QUADPACK maps onto a
    finite interval and subdivides according to the observed decay.
    """
    if not breakpoints:
        return _quad(f, 0.0, math.inf, spec)
    edge = float(breakpoints[-1])
    inner = [float(p) for p in breakpoints[:-1]]
    head = _quad(f, 0.0, edge, spec, points=inner or None)
    tail = _quad(f, edge, math.inf, spec)
    return head + tail


def _monotone_crossings(
    phase: Callable[[float], float], lo: float, hi: float
) -> list[float]:
    """Points in (lo, hi) where a monotone ``phase`` crosses a multiple of pi."""
    g_lo, g_hi = phase(lo), phase(hi)
    k_first = math.floor(min(g_lo, g_hi) / math.pi) + 1
    k_last = math.ceil(max(g_lo, g_hi) / math.pi) - 1
    roots = []
    for k in range(k_first, k_last + 1):
        level = k * math.pi
        roots.append(optimize.brentq(lambda x: phase(x) - level, lo, hi, xtol=1e-14))
    return roots


def integrate_gil_pelaez(
    sigma: float,
    rho: float,
    B: float,
    alpha: float,
    spec: QuadratureSpec = DEFAULT_1D,
) -> float:
    """(1/pi) * int_0^inf phi^-1 exp(-sigma phi^(2/alpha)) sin(rho phi^(2/alpha) - phi B) dphi.

    The head is integrated in x = phi^(2/alpha), where the integrand is finite
    at the origin, one half-period of the sine per panel. Once the fractional
    phase varies slowly against phi*B, the remaining tail is handed to
    QUADPACK's Fourier-integral routine. The head stops early when the
    envelope exp(-sigma x) drops below ``spec.oscillatory_cutoff_tolerance``.
    """
    if not alpha > 2:
        raise DomainError(f"Gil-Pelaez kernel requires alpha > 2, got {alpha}")
    if sigma < 0 or rho < 0:
        raise DomainError(f"sigma and rho must be non-negative, got {sigma}, {rho}")

    if sigma == 0.0 and rho == 0.0:
        # Dirichlet integral
        return -0.5 * float(np.sign(B))

    half = alpha / 2.0
    if B == 0.0:
        return half * math.atan2(rho, sigma) / math.pi

    abs_b = abs(B)
    phi_switch = max(
        (8.0 * rho / (alpha * abs_b)) ** (alpha / (alpha - 2.0)),
        2.0 * math.pi / abs_b,
    )
    x_switch = phi_switch ** (2.0 / alpha)
    cutoff = spec.oscillatory_cutoff_tolerance
    x_cut = -math.log(cutoff) / sigma if sigma > 0 else math.inf
    x_end = min(x_switch, x_cut)

    def phase(x: float) -> float:
        return rho * x - B * x ** half

    def head_integrand(x: float) -> float:
        # sin(g)/x == (g/x) * sinc(g/pi), finite at x = 0
        slope = rho - B * x ** (half - 1.0)
        return half * math.exp(-sigma * x) * slope * float(np.sinc(phase(x) / math.pi))

    x_peak = (2.0 * rho / (alpha * B)) ** (2.0 / (alpha - 2.0)) if B > 0 else math.inf
    if x_peak < x_end:
        edges = _monotone_crossings(phase, 0.0, x_peak) + [x_peak] + _monotone_crossings(phase, x_peak, x_end)
    else:
        edges = _monotone_crossings(phase, 0.0, x_end)
    edges = [0.0] + edges + [x_end]
    if len(edges) > 100 * spec.max_subdivisions:
        raise AccuracyError(f"Too many oscillation panels ({len(edges)}) before cutoff", float("nan"))

    head = math.fsum(_quad(head_integrand, lo, hi, spec) for lo, hi in zip(edges[:-1], edges[1:]))

    tail = 0.0
    if x_switch < x_cut:
        def slow_sin(phi: float) -> float:
            x = phi ** (2.0 / alpha)
            return math.exp(-sigma * x) * math.sin(rho * x) / phi

        def slow_cos(phi: float) -> float:
            x = phi ** (2.0 / alpha)
            return math.exp(-sigma * x) * math.cos(rho * x) / phi

        # sin(rho x - B phi) = sin(rho x) cos(|B| phi) - sign(B) cos(rho x) sin(|B| phi)
        cos_part = _quad(slow_sin, phi_switch, math.inf, spec, epsabs=cutoff, weight="cos", wvar=abs_b)
        sin_part = _quad(slow_cos, phi_switch, math.inf, spec, epsabs=cutoff, weight="sin", wvar=abs_b)
        tail = cos_part - math.copysign(1.0, B) * sin_part
    else:
        logger.debug(f"Gil-Pelaez envelope below {cutoff:.1e} at x={x_cut:.3g}; tail dropped")

    return (head + tail) / math.pi
