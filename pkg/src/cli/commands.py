"""Sub-command implementations: each resolves the scenario's sweep points and returns one table."""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from src.analysis.laplace import LaplaceModel, LaplaceVariant, RRS_VARIANTS, laplace_crs, laplace_rrs
from src.analysis.metrics import analytic_report
from src.cli.scenario import Scenario, ScenarioPoint
from src.network.occupancy import occupancy_pmf
from src.network.scheduling import delta_star
from src.simulation.montecarlo import estimate_metrics

logger = logging.getLogger(__name__)

DEFAULT_S_DB = tuple(np.linspace(-20.0, 20.0, 41))


def map_points(func: Callable[[ScenarioPoint], pd.DataFrame], scenario: Scenario, workers: int = 1) -> pd.DataFrame:
    """Evaluate ``func`` at every sweep point, concurrently, keeping sweep order in the result."""
    points = scenario.points()
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            frames = list(pool.map(func, points))
    else:
        frames = [func(point) for point in points]

    if scenario.sweep_axis is not None:
        for point, frame in zip(points, frames):
            frame.insert(0, scenario.sweep_label, point.value)
    return pd.concat(frames, ignore_index=True)


def _json_ready(frame: pd.DataFrame) -> list[dict]:
    records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
    return [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in row.items()} for row in records]


def write_table(frame: pd.DataFrame, out_dir: str, name: str, fmt: str, header: dict) -> Path:
    """Write ``frame`` as CSV (with a ``# params:`` comment line) or JSON."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.{fmt}"
    params_line = json.dumps(header, sort_keys=True, default=str)
    if fmt == "csv":
        with open(path, "w", newline="") as f:
            f.write(f"# params: {params_line}\n")
            frame.to_csv(f, index=False, float_format="%.10g", lineterminator="\n")
    else:
        payload = {"params": json.loads(params_line), "rows": _json_ready(frame)}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.info(f"Wrote {len(frame)} row(s) to {path}")
    return path


def run_pmf(scenario: Scenario, workers: int = 1) -> pd.DataFrame:
    """Occupancy PMF c_u per sweep point."""

    def evaluate(point: ScenarioPoint) -> pd.DataFrame:
        pmf = occupancy_pmf(point.params)
        rows = [(u, c_u) for u, c_u in enumerate(pmf.c)]
        if point.params.m_bar == 0:
            rows = rows[:1]
        return pd.DataFrame(rows, columns=["u", "c_u"])

    return map_points(evaluate, scenario, workers)


def run_laplace(
    scenario: Scenario,
    variants: Sequence[LaplaceVariant] = (LaplaceVariant.RRS_UPPER, LaplaceVariant.RRS_LOWER, LaplaceVariant.RRS_WEIGHTED),
    s_db: Sequence[float] = DEFAULT_S_DB,
    workers: int = 1,
) -> pd.DataFrame:
    """Interference transform over a grid of Laplace arguments given in dB."""

    def evaluate(point: ScenarioPoint) -> pd.DataFrame:
        rows = []
        pmf = occupancy_pmf(point.params)
        for variant in variants:
            model = LaplaceModel.build(point.params, variant, pmf)
            for x in s_db:
                s = 10.0 ** (x / 10.0)
                if variant in RRS_VARIANTS:
                    value = laplace_rrs(model, s)
                else:
                    value = laplace_crs(model, s, point.params.delta)
                rows.append((float(x), s, LaplaceVariant(variant).value, value))
        return pd.DataFrame(rows, columns=["s_db", "s", "variant", "value"])

    return map_points(evaluate, scenario, workers)


def run_analytic(
    scenario: Scenario,
    variant: LaplaceVariant = LaplaceVariant.RRS_WEIGHTED,
    record_per_rank: Optional[bool] = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Every analytic metric of the scenario's scheme per sweep point."""

    def evaluate(point: ScenarioPoint) -> pd.DataFrame:
        sim = point.simulation
        per_rank = sim.record_per_rank if record_per_rank is None else record_per_rank
        report = analytic_report(point.params, sim.scheme, variant, sim.power_split, per_rank)
        return report.to_frame()

    return map_points(evaluate, scenario, workers)


def run_success(scenario: Scenario, variant: LaplaceVariant = LaplaceVariant.RRS_WEIGHTED, workers: int = 1) -> pd.DataFrame:
    """Per-class (and per-rank when recorded) success probabilities."""
    frame = run_analytic(scenario, variant, workers=workers)
    return frame[frame["metric"].isin(["success", "rank_success"])].reset_index(drop=True)


def run_delta_star(scenario: Scenario, workers: int = 1) -> pd.DataFrame:
    """Coexistence power budget at s = theta for every sweep point."""

    def evaluate(point: ScenarioPoint) -> pd.DataFrame:
        c2 = occupancy_pmf(point.params).get(2)
        budget = delta_star(point.params, c2=c2)
        return pd.DataFrame([{
            "c2": c2,
            "delta_star": budget.value,
            "degenerate": budget.degenerate,
            "residual": budget.residual,
        }])

    return map_points(evaluate, scenario, workers)


def run_simulate(scenario: Scenario) -> pd.DataFrame:
    """Monte Carlo estimates per sweep point; sweep points run one after another, runs in parallel."""

    def evaluate(point: ScenarioPoint) -> pd.DataFrame:
        report = estimate_metrics(point.params, point.simulation)
        frame = report.to_frame()
        frame["runs"] = report.runs
        frame["seed"] = report.seed
        return frame

    return map_points(evaluate, scenario, workers=1)
