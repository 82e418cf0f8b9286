"""Analytic performance metrics."""
from .laplace import LaplaceModel, LaplaceVariant, laplace_crs, laplace_rrs, upsilon
from .metrics import Scheme, analytic_report, avg_power, rrs_avg_served, rrs_overall_success
from .report import Estimate, MetricReport
from .success import (
    GilPelaezTerms,
    b_term,
    crs_avg_served,
    crs_conditional_success,
    crs_overall_success,
    crs_rank_success,
    rrs_success,
)

__all__ = [
    'Estimate',
    'GilPelaezTerms',
    'LaplaceModel',
    'LaplaceVariant',
    'MetricReport',
    'Scheme',
    'analytic_report',
    'avg_power',
    'b_term',
    'crs_avg_served',
    'crs_conditional_success',
    'crs_overall_success',
    'crs_rank_success',
    'laplace_crs',
    'laplace_rrs',
    'rrs_avg_served',
    'rrs_overall_success',
    'rrs_success',
    'upsilon',
]
