"""Numerical kernels package."""
from .specfun import (
    DEFAULT_1D,
    DEFAULT_2D,
    QuadratureSpec,
    digamma,
    integrate_2d_polar,
    integrate_gil_pelaez,
    integrate_semi_infinite,
    regularized_gamma_q,
)

__all__ = [
    'DEFAULT_1D',
    'DEFAULT_2D',
    'QuadratureSpec',
    'digamma',
    'integrate_2d_polar',
    'integrate_gil_pelaez',
    'integrate_semi_infinite',
    'regularized_gamma_q',
]
