"""Scenario files: YAML sections network/simulation/sweep/output plus command-line overrides."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

import yaml
from pydantic import ValidationError

from src.network.params import NetworkParams
from src.network.scheduling import delta_star
from src.simulation.montecarlo import SimConfig
from src.utils.errors import ScenarioError

logger = logging.getLogger(__name__)

SECTIONS = ("network", "simulation", "sweep", "output")

# scenario key -> NetworkParams field; keys carry their unit
NETWORK_KEYS = {
    "lambda_a_per_m2": "lambda_a",
    "log10_lambda_a_per_m2": "lambda_a",
    "R_a_m": "R_a",
    "alpha": "alpha",
    "m_bar": "m_bar",
    "N": "N",
    "L": "L",
    "theta": "theta",
    "mu": "mu",
    "rho_w": "rho",
    "beta0": "beta0",
    "beta1": "beta1",
    "delta": "delta",
}
SIMULATION_KEYS = tuple(SimConfig.model_fields)
OUTPUT_KEYS = ("dir", "format")
SWEEP_KEYS = ("parameter", "values")
OUTPUT_FORMATS = ("csv", "json")

_KNOWN = {"network": tuple(NETWORK_KEYS), "simulation": SIMULATION_KEYS, "output": OUTPUT_KEYS, "sweep": SWEEP_KEYS}


class ScenarioPoint(NamedTuple):
    """One resolved sweep point; ``value`` is None without a sweep."""

    value: Any
    params: NetworkParams
    simulation: SimConfig


def _key_lines(text: str) -> dict[tuple[str, ...], int]:
    """1-based line of every section and section.key in the YAML document."""
    root = yaml.compose(text)
    lines: dict[tuple[str, ...], int] = {}
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        section = str(key_node.value)
        lines[(section,)] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for inner_key, _ in value_node.value:
                lines[(section, str(inner_key.value))] = inner_key.start_mark.line + 1
    return lines


def _parse_text(text: str, source: str) -> tuple[dict, dict]:
    try:
        data = yaml.safe_load(text) or {}
        lines = _key_lines(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        where = f" column {mark.column + 1}" if mark is not None else ""
        raise ScenarioError(f"Invalid YAML in {source}{where}: {getattr(e, 'problem', e)}", line=line) from e
    if not isinstance(data, dict):
        raise ScenarioError(f"Scenario {source} must be a mapping of sections, got {type(data).__name__}")
    return data, lines


def _resolve_key(key: str) -> tuple[str, str]:
    """Map 'section.key' or a bare key to (section, key)."""
    if "." in key:
        section, name = key.split(".", 1)
        if section not in _KNOWN:
            raise ScenarioError(f"Unknown section '{section}'", field=key)
        if name not in _KNOWN[section]:
            raise ScenarioError(f"Unknown key '{name}' in section '{section}'", field=key)
        return section, name
    for section in ("network", "simulation", "output", "sweep"):
        if key in _KNOWN[section]:
            return section, key
    raise ScenarioError(f"Unknown scenario key '{key}'", field=key)


def parse_override(text: str) -> tuple[str, str, Any]:
    """Split ``key=value``; the value is read as a YAML scalar or list."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ScenarioError(f"Override must look like key=value, got '{text}'")
    section, name = _resolve_key(key.strip())
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ScenarioError(f"Unreadable override value '{raw}'", field=key.strip()) from e
    return section, name, value


@dataclass
class Scenario:
    """A validated scenario: raw user-unit values, resolved lazily into sweep points."""

    network: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    source: str = "<defaults>"

    @property
    def sweep_axis(self) -> Optional[tuple[str, str]]:
        if not self.sweep:
            return None
        return _resolve_key(str(self.sweep["parameter"]))

    @property
    def sweep_label(self) -> str:
        axis = self.sweep_axis
        return axis[1] if axis else "point"

    @property
    def output_format(self) -> str:
        return self.output.get("format", "csv")

    @property
    def output_dir(self) -> Optional[str]:
        return self.output.get("dir")

    def _error(self, message: str, section: str, key: Optional[str] = None) -> ScenarioError:
        path = (section, key) if key else (section,)
        return ScenarioError(message, field=".".join(path), line=self.lines.get(path))

    def with_overrides(self, **sections) -> "Scenario":
        """Copy with keys replaced per section, e.g. ``with_overrides(network={"N": 20})``."""
        merged = {name: dict(getattr(self, name)) for name in ("network", "simulation", "sweep", "output")}
        for name, values in sections.items():
            merged[name].update(values)
        return Scenario(**merged, lines=self.lines, source=self.source)

    def build_params(self, network: Optional[dict] = None) -> NetworkParams:
        raw = self.network if network is None else network
        if "lambda_a_per_m2" in raw and "log10_lambda_a_per_m2" in raw:
            raise self._error("Give either lambda_a_per_m2 or log10_lambda_a_per_m2, not both", "network", "log10_lambda_a_per_m2")
        kwargs, star = {}, False
        for key, value in raw.items():
            if key == "delta" and value == "star":
                star = True
            elif key == "log10_lambda_a_per_m2":
                try:
                    kwargs["lambda_a"] = 10.0 ** float(value)
                except (TypeError, ValueError):
                    raise self._error(f"Expected a number, got {value!r}", "network", key)
            else:
                kwargs[NETWORK_KEYS[key]] = value
        try:
            params = NetworkParams(**kwargs)
        except ValidationError as e:
            raise self._validation_error(e, "network") from e
        if star:
            budget = delta_star(params)
            params = params.model_copy(update={"delta": budget.value})
        return params

    def build_simulation(self, simulation: Optional[dict] = None) -> SimConfig:
        raw = self.simulation if simulation is None else simulation
        try:
            return SimConfig(**raw)
        except ValidationError as e:
            raise self._validation_error(e, "simulation") from e

    def _validation_error(self, error: ValidationError, section: str) -> ScenarioError:
        first = error.errors()[0]
        name = str(first["loc"][0]) if first["loc"] else None
        if section == "network" and name:
            keys = [k for k, v in NETWORK_KEYS.items() if v == name and k in self.network]
            name = keys[0] if keys else name
        return self._error(f"Invalid value: {first['msg']}", section, name)

    def points(self) -> list[ScenarioPoint]:
        """Resolve every sweep point, or the single scenario point without a sweep."""
        axis = self.sweep_axis
        if axis is None:
            return [ScenarioPoint(None, self.build_params(), self.build_simulation())]
        section, key = axis
        points = []
        for value in self.sweep["values"]:
            network, simulation = dict(self.network), dict(self.simulation)
            if section == "network":
                if key in ("lambda_a_per_m2", "log10_lambda_a_per_m2"):
                    network.pop("lambda_a_per_m2", None)
                    network.pop("log10_lambda_a_per_m2", None)
                network[key] = value
            else:
                simulation[key] = value
            points.append(ScenarioPoint(value, self.build_params(network), self.build_simulation(simulation)))
        return points

    def describe(self) -> dict:
        """Resolved parameter set recorded alongside every output table."""
        first = self.points()[0]
        record = {
            "network": first.params.model_dump(),
            "simulation": first.simulation.model_dump(mode="json"),
            "source": self.source,
        }
        if self.sweep:
            record["sweep"] = {"parameter": self.sweep_label, "values": list(self.sweep["values"])}
        return record


def _validate_sections(data: dict, lines: dict):
    for section, body in data.items():
        if section not in SECTIONS:
            raise ScenarioError(f"Unknown section '{section}'", field=str(section), line=lines.get((str(section),)))
        if body is None:
            data[section] = {}
            continue
        if not isinstance(body, dict):
            raise ScenarioError(f"Section '{section}' must be a mapping", field=section, line=lines.get((section,)))
        for key in body:
            if key not in _KNOWN[section]:
                raise ScenarioError(
                    f"Unknown key '{key}' in section '{section}'",
                    field=f"{section}.{key}",
                    line=lines.get((section, str(key))),
                )


def _validate_sweep(scenario: Scenario):
    if not scenario.sweep:
        return
    if "parameter" not in scenario.sweep:
        raise ScenarioError("Sweep needs a 'parameter'", field="sweep", line=scenario.lines.get(("sweep",)))
    try:
        section, key = _resolve_key(str(scenario.sweep["parameter"]))
    except ScenarioError as e:
        raise ScenarioError(str(e), field=f"sweep.parameter={scenario.sweep['parameter']}", line=scenario.lines.get(("sweep", "parameter"))) from e
    if section not in ("network", "simulation"):
        raise ScenarioError("Only network and simulation keys can be swept", field="sweep.parameter", line=scenario.lines.get(("sweep", "parameter")))
    values = scenario.sweep.get("values")
    if not isinstance(values, list) or not values:
        raise ScenarioError("Sweep 'values' must be a non-empty list", field="sweep.values", line=scenario.lines.get(("sweep", "values")))


def load_scenario(
    path: Optional[str] = None,
    overrides: Sequence[str] = (),
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Scenario:
    """Read a scenario file (or defaults when ``path`` is None) and apply overrides in order."""
    if path is None:
        data, lines, source = {}, {}, "<defaults>"
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ScenarioError(f"Cannot read scenario file {path}: {e}") from e
        data, lines = _parse_text(text, path)
        source = str(path)
    _validate_sections(data, lines)

    for override in overrides:
        section, key, value = parse_override(override)
        data.setdefault(section, {})[key] = value
    if seed is not None:
        data.setdefault("simulation", {})["seed"] = seed
    if workers is not None:
        data.setdefault("simulation", {})["workers"] = workers

    scenario = Scenario(
        network=dict(data.get("network") or {}),
        simulation=dict(data.get("simulation") or {}),
        sweep=dict(data.get("sweep") or {}),
        output=dict(data.get("output") or {}),
        lines=lines,
        source=source,
    )
    if scenario.output_format not in OUTPUT_FORMATS:
        raise ScenarioError(f"Output format must be one of {OUTPUT_FORMATS}", field="output.format", line=lines.get(("output", "format")))
    _validate_sweep(scenario)
    # resolve once so every field error surfaces before any work starts
    scenario.points()
    logger.info(f"Loaded scenario {source} ({len(scenario.sweep.get('values', [None]))} point(s))")
    return scenario
