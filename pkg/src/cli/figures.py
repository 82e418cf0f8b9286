"""Data series behind the evaluation figures, one table per curve."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.analysis.laplace import RRS_VARIANTS, LaplaceModel, LaplaceVariant, laplace_crs, laplace_rrs
from src.analysis.metrics import Scheme, analytic_report, avg_power
from src.analysis.report import Estimate, MetricReport
from src.network.params import NetworkParams, OccupancyPMF
from src.network.scheduling import delta_star
from src.simulation.montecarlo import SimConfig, estimate_metrics
from src.utils.errors import ScenarioError

logger = logging.getLogger(__name__)

FIGURE_IDS = ("2", "3", "4", "5", "6a", "6b", "7a", "7b")
DEFAULT_POINTS = {"2": 41, "3": 41, "4": 21, "5": 11, "6a": 11, "6b": 11, "7a": 11, "7b": 11}
CURVE_COLUMNS = ["x", "analytic", "simulated", "ci_low", "ci_high"]

_NO_ESTIMATE = Estimate(math.nan)
SINGLE_DEVICE_SCHEMES = {"oma": Scheme.OMA, "crs_L1": Scheme.CRS_FIXED}
SHARED_SCHEMES = {"rrs": Scheme.RRS, "crs_fixed": Scheme.CRS_FIXED, "crs": Scheme.CRS_EQUAL}


@dataclass
class Curve:
    name: str
    x_label: str
    frame: pd.DataFrame


def _curve(name: str, x_label: str, xs, analytic, simulated: Optional[Sequence[Estimate]] = None) -> Curve:
    simulated = simulated or [_NO_ESTIMATE] * len(xs)
    frame = pd.DataFrame({
        "x": [float(x) for x in xs],
        "analytic": [float(v) for v in analytic],
        "simulated": [e.value for e in simulated],
        "ci_low": [e.ci_low for e in simulated],
        "ci_high": [e.ci_high for e in simulated],
    }, columns=CURVE_COLUMNS)
    return Curve(name, x_label, frame)


def _with(params: NetworkParams, **update) -> NetworkParams:
    return NetworkParams(**{**params.model_dump(), **update})


def _int_grid(lo: int, hi: int, points: int) -> list[int]:
    return sorted({int(round(x)) for x in np.linspace(lo, hi, points)})


def _db_grid(points: int) -> np.ndarray:
    return np.linspace(-20.0, 20.0, points)


class _Evaluator:
    """Analytic and (optionally) simulated reports for a list of parameter points.

    With ``star_delta`` the power budget of every point holding shared channels
    is re-solved as delta* for that point.
    """

    def __init__(self, sim: SimConfig, runs: int, workers: int, star_delta: bool = False):
        self.sim = sim
        self.runs = runs
        self.workers = workers
        self.star_delta = star_delta

    def resolve(self, params: NetworkParams) -> NetworkParams:
        if not self.star_delta or params.L < 2:
            return params
        return params.model_copy(update={"delta": delta_star(params).value})

    def analytic(self, params_list: list[NetworkParams], scheme: Scheme) -> list[MetricReport]:
        def evaluate(params):
            return analytic_report(params, scheme, split=self.sim.power_split)

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(evaluate, params_list))
        return [evaluate(params) for params in params_list]

    def simulated(self, params_list: list[NetworkParams], scheme: Scheme) -> Optional[list[MetricReport]]:
        if self.runs <= 0:
            return None
        config = SimConfig(**{**self.sim.model_dump(), "runs": self.runs, "scheme": scheme})
        return [estimate_metrics(params, config) for params in params_list]


def _pick(report: MetricReport, metric: str, key=None) -> Estimate:
    if metric == "success":
        return report.success.get(key, _NO_ESTIMATE)
    return getattr(report, metric)


def _metric_curves(
    evaluator: _Evaluator,
    prefix: str,
    x_label: str,
    xs,
    params_list: list[NetworkParams],
    schemes: dict[str, Scheme],
    metrics: Sequence[tuple[str, str, Optional[tuple]]],
) -> list[Curve]:
    """One curve per (scheme label, metric) with shared analytic and simulated reports."""
    curves = []
    params_list = [evaluator.resolve(params) for params in params_list]
    for label, scheme in schemes.items():
        analytic = evaluator.analytic(params_list, scheme)
        simulated = evaluator.simulated(params_list, scheme)
        for suffix, metric, key in metrics:
            curves.append(_curve(
                f"{prefix}_{label}{suffix}",
                x_label,
                xs,
                [_pick(r, metric, key).value for r in analytic],
                [_pick(r, metric, key) for r in simulated] if simulated else None,
            ))
    return curves


def _figure_2(base: NetworkParams, evaluator: _Evaluator, points: int) -> list[Curve]:
    """Random-scheduling transform: exact, both bounds and the weighted mix."""
    curves = []
    s_db = _db_grid(points)
    all_shared = OccupancyPMF(c=(0.0, 0.0, 1.0))
    for alpha in (3.0, 3.6, 5.0):
        params = _with(base, alpha=alpha, L=2)
        for variant in RRS_VARIANTS:
            model = LaplaceModel.build(params, variant, all_shared)
            values = [laplace_rrs(model, 10.0 ** (x / 10.0)) for x in s_db]
            curves.append(_curve(f"a_alpha{alpha:g}_{variant.value}", "s_db", s_db, values))

    n_grid = _int_grid(5, 60, points)
    for log_lambda in (-4.2, -4.8):
        grid = [_with(base, lambda_a=10.0 ** log_lambda, N=n, m_bar=60.0, L=2) for n in n_grid]
        for variant in RRS_VARIANTS:
            values = [laplace_rrs(LaplaceModel.build(p, variant), 1.0) for p in grid]
            curves.append(_curve(f"b_lambda{log_lambda:g}_{variant.value}", "N", n_grid, values))
    return curves


def _figure_3(base: NetworkParams, evaluator: _Evaluator, points: int, marks=(0.5, 0.2)) -> list[Curve]:
    """Channel-aware transform at delta = 1 against the fixed-mark reference."""
    curves = []
    delta = 1.0
    params = _with(base, delta=delta, L=2)
    s_db = _db_grid(points)

    weighted = LaplaceModel.build(params, LaplaceVariant.CRS_WEIGHTED)
    curves.append(_curve("a_weighted", "s_db", s_db, [laplace_crs(weighted, 10.0 ** (x / 10.0), delta) for x in s_db]))
    for mark in marks:
        exact = LaplaceModel.build(params, LaplaceVariant.CRS_EXACT_FIXED_MARKS, weighted.pmf, reference=True, mark=mark)
        values = [laplace_crs(exact, 10.0 ** (x / 10.0), delta) for x in s_db]
        curves.append(_curve(f"a_exact_mark{mark:g}", "s_db", s_db, values))

    n_grid = _int_grid(5, 60, points)
    for log_lambda in (-4.2, -4.8):
        grid = [_with(params, lambda_a=10.0 ** log_lambda, N=n) for n in n_grid]
        weighted_values, exact_values = [], []
        for p in grid:
            model = LaplaceModel.build(p, LaplaceVariant.CRS_WEIGHTED)
            weighted_values.append(laplace_crs(model, 1.0, delta))
            exact = LaplaceModel.build(p, LaplaceVariant.CRS_EXACT_FIXED_MARKS, model.pmf, reference=True, mark=marks[0])
            exact_values.append(laplace_crs(exact, 1.0, delta))
        curves.append(_curve(f"b_lambda{log_lambda:g}_weighted", "N", n_grid, weighted_values))
        curves.append(_curve(f"b_lambda{log_lambda:g}_exact_mark{marks[0]:g}", "N", n_grid, exact_values))
    return curves


def _figure_4(base: NetworkParams, evaluator: _Evaluator, points: int) -> list[Curve]:
    """Average transmit power per channel against the sharing probability c2, with c0 = 0."""
    c2_grid = np.linspace(0.0, 1.0, points)
    params = _with(base, L=2)
    curves = {"oma": [], "rrs_delta2": [], "crs_delta1": [], "crs_delta_star": []}
    for c2 in c2_grid:
        pmf = OccupancyPMF(c=(0.0, 1.0 - c2, c2))
        curves["oma"].append(avg_power(params, pmf, "oma"))
        curves["rrs_delta2"].append(avg_power(params, pmf, "hybrid", 2.0))
        curves["crs_delta1"].append(avg_power(params, pmf, "hybrid", 1.0))
        curves["crs_delta_star"].append(avg_power(params, pmf, "hybrid", delta_star(params, c2=float(c2)).value))
    return [_curve(name, "c2", c2_grid, values) for name, values in curves.items()]


def _figure_5(base: NetworkParams, evaluator: _Evaluator, points: int) -> list[Curve]:
    """Success of both devices on shared channels against N."""
    n_grid = _int_grid(10, 60, points)
    grid = [_with(base, N=n, L=2) for n in n_grid]
    schemes = {"rrs": Scheme.RRS, "crs_fixed": Scheme.CRS_FIXED, "crs_equal": Scheme.CRS_EQUAL}
    metrics = [("_j1", "success", (1, 2)), ("_j2", "success", (2, 2))]
    return _metric_curves(evaluator, "u2", "N", n_grid, grid, schemes, metrics)


def _figure_6(base: NetworkParams, evaluator: _Evaluator, points: int, metric: str) -> list[Curve]:
    """OMA against hybrid access, random and channel-aware, against N."""
    n_grid = _int_grid(10, 60, points)
    one = [_with(base, N=n, L=1) for n in n_grid]
    two = [_with(base, N=n, L=2) for n in n_grid]
    curves = _metric_curves(evaluator, metric, "N", n_grid, one, SINGLE_DEVICE_SCHEMES, [("", metric, None)])
    curves += _metric_curves(
        evaluator, metric, "N", n_grid, two,
        {"rrs_L2": Scheme.RRS, "crs_fixed_L2": Scheme.CRS_FIXED, "crs_L2": Scheme.CRS_EQUAL},
        [("", metric, None)],
    )
    return curves


def _figure_7a(base: NetworkParams, evaluator: _Evaluator, points: int) -> list[Curve]:
    """Served devices against aggregator density for perfect and imperfect SIC."""
    log_grid = np.linspace(-5.0, -3.5, points)
    served = [("", "avg_served", None)]
    # single-device channels never cancel, so one baseline covers every mu
    one = [_with(base, lambda_a=10.0 ** x, N=30, L=1) for x in log_grid]
    curves = _metric_curves(evaluator, "baseline", "log10_lambda_a", log_grid, one, SINGLE_DEVICE_SCHEMES, served)
    for mu in (0.0, 0.1):
        grid = [_with(base, lambda_a=10.0 ** x, mu=mu, N=30, L=2) for x in log_grid]
        curves += _metric_curves(evaluator, f"mu{mu:g}", "log10_lambda_a", log_grid, grid, SHARED_SCHEMES, served)
    return curves


def _figure_7b(base: NetworkParams, evaluator: _Evaluator, points: int) -> list[Curve]:
    """Served devices against the SIC imperfection mu."""
    # equal-reliability power split needs mu < 1
    mu_grid = np.linspace(0.0, 0.9, points)
    served = [("", "avg_served", None)]
    one = [_with(base, mu=float(mu), L=1) for mu in mu_grid]
    two = [_with(base, mu=float(mu), L=2) for mu in mu_grid]
    curves = _metric_curves(evaluator, "served", "mu", mu_grid, one, SINGLE_DEVICE_SCHEMES, served)
    return curves + _metric_curves(evaluator, "served", "mu", mu_grid, two, SHARED_SCHEMES, served)


def run_figure(
    fig_id: str,
    params: NetworkParams,
    sim: SimConfig,
    points: Optional[int] = None,
    runs: int = 0,
    workers: int = 1,
    star_delta: bool = False,
) -> list[Curve]:
    """Compute every curve of figure ``fig_id``; simulated columns stay NaN unless ``runs`` > 0.

    ``star_delta`` re-solves delta* at every swept point instead of reusing
    the budget of ``params``.
    """
    if fig_id not in FIGURE_IDS:
        raise ScenarioError(f"Unknown figure id '{fig_id}', expected one of {FIGURE_IDS}", field="id")
    points = DEFAULT_POINTS[fig_id] if points is None else points
    if points < 2:
        raise ScenarioError(f"A figure needs at least 2 points, got {points}", field="points")
    evaluator = _Evaluator(sim, runs, workers, star_delta)
    logger.info(f"Computing figure {fig_id} with {points} points per curve (runs={runs})")

    builders = {
        "2": lambda: _figure_2(params, evaluator, points),
        "3": lambda: _figure_3(params, evaluator, points),
        "4": lambda: _figure_4(params, evaluator, points),
        "5": lambda: _figure_5(params, evaluator, points),
        "6a": lambda: _figure_6(params, evaluator, points, "overall_success"),
        "6b": lambda: _figure_6(params, evaluator, points, "avg_served"),
        "7a": lambda: _figure_7a(params, evaluator, points),
        "7b": lambda: _figure_7b(params, evaluator, points),
    }
    curves = builders[fig_id]()
    logger.info(f"Figure {fig_id}: {len(curves)} curve(s)")
    return curves
