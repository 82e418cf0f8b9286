"""
Tests for scenario parsing, sub-commands and figure data
"""
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import json
import math

import numpy as np
import pandas as pd
import pytest

from hybrid_mtc import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from src.cli.commands import run_delta_star, run_laplace, run_pmf, write_table
from src.analysis.report import Estimate, MetricReport
from src.cli import figures
from src.cli.figures import CURVE_COLUMNS, run_figure
from src.cli.scenario import load_scenario, parse_override
from src.network.params import NetworkParams
from src.network.scheduling import delta_star
from src.simulation.montecarlo import SimConfig
from src.utils.errors import ScenarioError


def _write(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_defaults_without_file():
    scenario = load_scenario()
    [point] = scenario.points()
    assert point.value is None
    assert point.params == NetworkParams()
    assert point.simulation == SimConfig()


def test_pmf_table_small_network():
    frame = run_pmf(load_scenario(overrides=["N=4", "L=2", "m_bar=6"]))
    assert frame["u"].tolist() == [0, 1, 2]
    assert frame["c_u"].sum() == pytest.approx(1.0, abs=1e-12)


def test_pmf_table_empty_clusters():
    frame = run_pmf(load_scenario(overrides=["network.m_bar=0"]))
    assert len(frame) == 1
    assert frame.loc[0, "c_u"] == pytest.approx(1.0)


def test_sweep_adds_axis_column(tmp_path):
    path = _write(tmp_path, "network:\n  m_bar: 6\nsweep:\n  parameter: network.N\n  values: [2, 4]\n")
    frame = run_pmf(load_scenario(path), workers=2)
    assert frame.columns[0] == "N"
    assert frame["N"].tolist() == [2, 2, 2, 4, 4, 4]


def test_unit_keys():
    scenario = load_scenario(overrides=["log10_lambda_a_per_m2=-4", "R_a_m=25", "rho_w=0.5"])
    params = scenario.points()[0].params
    assert params.lambda_a == pytest.approx(1e-4)
    assert params.R_a == 25.0 and params.rho == 0.5


def test_both_density_keys_rejected():
    with pytest.raises(ScenarioError):
        load_scenario(overrides=["lambda_a_per_m2=1e-4", "log10_lambda_a_per_m2=-4"])


def test_star_budget_resolves_to_bracket():
    params = load_scenario(overrides=["delta=star"]).points()[0].params
    assert 2.0 ** ((2.0 - params.alpha) / 2.0) <= params.delta <= 1.0


def test_sweep_over_unknown_field(tmp_path):
    path = _write(tmp_path, "sweep:\n  parameter: network.foo\n  values: [1, 2]\n")
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert "foo" in str(excinfo.value)
    assert excinfo.value.line == 2


def test_unknown_key_reports_line(tmp_path):
    path = _write(tmp_path, "network:\n  N: 4\n  bogus: 1\n")
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert excinfo.value.field == "network.bogus"
    assert excinfo.value.line == 3


def test_invalid_value_reports_field(tmp_path):
    path = _write(tmp_path, "network:\n  alpha: 1.5\n")
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert excinfo.value.field == "network.alpha"
    assert excinfo.value.line == 2


def test_yaml_syntax_error_reports_line(tmp_path):
    path = _write(tmp_path, "network:\n  N: [4\n  L: 2\n")
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert excinfo.value.line is not None


def test_override_parsing():
    assert parse_override("simulation.runs=100") == ("simulation", "runs", 100)
    assert parse_override("scheme=crs_fixed") == ("simulation", "scheme", "crs_fixed")
    with pytest.raises(ScenarioError):
        parse_override("runs")
    with pytest.raises(ScenarioError):
        parse_override("network.runs=3")


def test_laplace_table():
    frame = run_laplace(load_scenario(), s_db=[-10.0, 0.0, 10.0])
    assert set(frame["variant"]) == {"rrs_upper", "rrs_lower", "rrs_weighted"}
    assert frame["value"].between(0.0, 1.0).all()


def test_delta_star_table():
    frame = run_delta_star(load_scenario())
    assert list(frame.columns) == ["c2", "delta_star", "degenerate", "residual"]
    assert not frame.loc[0, "degenerate"]


def test_csv_carries_params_line(tmp_path):
    frame = pd.DataFrame({"x": [1.0, 2.0], "value": [0.5, math.nan]})
    path = write_table(frame, str(tmp_path), "table", "csv", {"network": {"N": 4}})
    first, header = path.read_text().splitlines()[:2]
    assert first == '# params: {"network": {"N": 4}}'
    assert header == "x,value"
    assert pd.read_csv(path, comment="#")["value"].isna().tolist() == [False, True]


def test_json_output_uses_null(tmp_path):
    frame = pd.DataFrame({"x": [1.0], "value": [math.nan]})
    path = write_table(frame, str(tmp_path), "table", "json", {})
    payload = json.loads(path.read_text())
    assert payload["rows"] == [{"x": 1.0, "value": None}]


def test_power_figure_curves():
    curves = run_figure("4", NetworkParams(), SimConfig(), points=5)
    names = {curve.name for curve in curves}
    assert names == {"oma", "rrs_delta2", "crs_delta1", "crs_delta_star"}
    by_name = {curve.name: curve.frame for curve in curves}
    for frame in by_name.values():
        assert list(frame.columns) == CURVE_COLUMNS
        assert frame["simulated"].isna().all()
    shared = by_name["oma"]["x"] > 0
    assert np.all(by_name["crs_delta_star"]["analytic"][shared] < by_name["oma"]["analytic"][shared])
    assert by_name["rrs_delta2"]["analytic"].iloc[-1] == pytest.approx(2.0 * by_name["oma"]["analytic"].iloc[-1])


@pytest.fixture
def budget_report(monkeypatch):
    """Replace the analytic evaluation with one that reports each point's delta and L."""
    def report(params, scheme, split=0.5, **kwargs):
        return MetricReport(
            scheme=scheme.value,
            source="analytic",
            success={},
            overall_success=Estimate.exact(params.delta),
            avg_served=Estimate.exact(float(params.L)),
            avg_power=Estimate.exact(0.0),
        )

    monkeypatch.setattr(figures, "analytic_report", report)


def test_served_figures_carry_single_device_baselines(budget_report):
    for fig_id, expected in (
        ("6b", {"avg_served_oma", "avg_served_crs_L1", "avg_served_rrs_L2", "avg_served_crs_fixed_L2", "avg_served_crs_L2"}),
        ("7a", {"baseline_oma", "baseline_crs_L1"}
               | {f"mu{mu}_{label}" for mu in ("0", "0.1") for label in ("rrs", "crs_fixed", "crs")}),
        ("7b", {"served_oma", "served_crs_L1", "served_rrs", "served_crs_fixed", "served_crs"}),
    ):
        curves = {curve.name: curve.frame for curve in run_figure(fig_id, NetworkParams(), SimConfig(), points=3)}
        assert set(curves) == expected
        for name, frame in curves.items():
            single = name.endswith(("oma", "crs_L1"))
            assert (frame["analytic"] == (1.0 if single else 2.0)).all()


def test_figure_sweep_resolves_budget_per_point(budget_report):
    base = NetworkParams(delta=delta_star(NetworkParams()).value)
    curves = {c.name: c.frame for c in run_figure("6a", base, SimConfig(), points=3, star_delta=True)}
    frame = curves["overall_success_crs_L2"]
    for n, value in zip(frame["x"], frame["analytic"]):
        assert value == pytest.approx(delta_star(NetworkParams(N=int(n))).value, abs=1e-12)
    assert frame["analytic"].nunique() == 3
    fixed = {c.name: c.frame for c in run_figure("6a", base, SimConfig(), points=3)}
    assert (fixed["overall_success_crs_L2"]["analytic"] == base.delta).all()


def test_unknown_figure():
    with pytest.raises(ScenarioError):
        run_figure("9", NetworkParams(), SimConfig())


def test_exit_codes(tmp_path):
    assert main(["pmf", "--set", "N=4", "--set", "m_bar=6", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "pmf.csv").read_text().startswith("# params: ")
    assert main(["pmf", "--set", "bogus=1", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["figure", "--id", "9", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["metrics", "--set", "L=3", "--out", str(tmp_path)]) == EXIT_NUMERIC


def test_json_format_flag(tmp_path):
    assert main(["delta-star", "--format", "json", "--out", str(tmp_path)]) == EXIT_OK
    payload = json.loads((tmp_path / "delta_star.json").read_text())
    assert payload["params"]["network"]["N"] == 30


@pytest.mark.slow
def test_served_figure_with_simulation(tmp_path):
    curves = run_figure("6b", NetworkParams(m_bar=12.0), SimConfig(expected_aggregators=60.0), points=2, runs=200)
    for curve in curves:
        assert curve.frame["simulated"].notna().all()
        assert (curve.frame["ci_low"] <= curve.frame["simulated"]).all()
