"""Monte Carlo validation of the analytic metrics."""
from .montecarlo import Realization, SimConfig, SirSample, estimate_metrics, evaluate_sir, sample_realization

__all__ = [
    'Realization',
    'SimConfig',
    'SirSample',
    'estimate_metrics',
    'evaluate_sir',
    'sample_realization',
]
