"""Cluster network model: parameters, channel occupancy and scheduling."""
from .occupancy import conditional_occupancy, kmax_for_tail, occupancy_pmf, poisson_pmf
from .params import NetworkParams, OccupancyPMF
from .scheduling import (
    Assignment,
    CoexistenceBudget,
    PowerControl,
    PowerRule,
    crs_assign,
    delta_star,
    power_coefficients,
    rrs_assign,
)

__all__ = [
    'Assignment',
    'CoexistenceBudget',
    'NetworkParams',
    'OccupancyPMF',
    'PowerControl',
    'PowerRule',
    'conditional_occupancy',
    'crs_assign',
    'delta_star',
    'kmax_for_tail',
    'occupancy_pmf',
    'poisson_pmf',
    'power_coefficients',
    'rrs_assign',
]
