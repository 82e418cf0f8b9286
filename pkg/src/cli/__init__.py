"""Command-line experiment driver."""
from .commands import run_analytic, run_delta_star, run_laplace, run_pmf, run_simulate, run_success, write_table
from .figures import FIGURE_IDS, run_figure
from .scenario import Scenario, load_scenario

__all__ = [
    'FIGURE_IDS',
    'Scenario',
    'load_scenario',
    'run_analytic',
    'run_delta_star',
    'run_figure',
    'run_laplace',
    'run_pmf',
    'run_simulate',
    'run_success',
    'write_table',
]
