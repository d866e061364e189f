"""Scenario files: JSON documents describing one network experiment.

Node labels in files are 1-based. A minimal document::

    {
      "name": "fn_antisync",
      "topology": {"nodes": 5, "edges": [[1, 2], [1, 3], [3, 4], [3, 5]]},
      "dynamics": {"name": "fitzhugh_nagumo", "params": {"a": 0, "b": 0.8, "c": 3, "I": 0}},
      "partition": {"groups": [
          {"nodes": [1, 3], "symmetry": "identity"},
          {"nodes": [2, 4, 5], "symmetry": {"matrix": [[-1, 0], [0, -1]]}}]},
      "sim": {"k": 1, "t_end": 100, "h": 0.001,
              "initial_conditions": {"distribution": "standard-normal", "seed": 3}}
    }

Symmetries are ``"identity"``, ``"negation"``, ``{"rotation2d": degrees}`` or
``{"matrix": rows}`` (row-major). ``parse_scenario`` fills every default, so
``scenario_to_dict`` yields the canonical form the digest is computed over.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .dynamics import DynamicsError, NodeDynamics, make_controller, make_dynamics
from .graph import Topology, TopologyError, build_topology
from .protocol import Partition, PartitionError, build_multipartite_partition
from .sim import InitialConditions, SimConfig, SimulationError
from .symmetry import SymmetryElement, SymmetryError, parse_symmetry
from .verify import PATTERN_TOL, WINDOW_FRACTION


class ScenarioError(ValueError):
    pass


_NUMBER = {"type": "number"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _NUMBER, "minItems": 1}, "minItems": 1}
_SYMMETRY = {
    "oneOf": [
        {"type": "string", "enum": ["identity", "negation"]},
        {"type": "object", "required": ["rotation2d"], "additionalProperties": False,
         "properties": {"rotation2d": _NUMBER, "label": {"type": "string"}}},
        {"type": "object", "required": ["matrix"], "additionalProperties": False,
         "properties": {"matrix": _MATRIX, "label": {"type": "string"}}},
    ]
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["topology", "dynamics", "sim"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "topology": {
            "type": "object", "required": ["nodes", "edges"], "additionalProperties": False,
            "properties": {
                "nodes": {"type": "integer", "minimum": 1},
                "edges": {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                     "minItems": 2, "maxItems": 2}},
                "directed": {"type": "boolean"},
            },
        },
        "dynamics": {
            "type": "object", "required": ["name"], "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "object"},
                "kind": {"enum": ["continuous", "discrete"]},
                "controller": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "object", "required": ["name"], "additionalProperties": False,
                         "properties": {"name": {"type": "string"},
                                        "params": {"type": "object", "additionalProperties": _NUMBER}}},
                    ]
                },
            },
        },
        "partition": {
            "type": "object", "required": ["groups"], "additionalProperties": False,
            "properties": {
                "groups": {
                    "type": "array", "minItems": 1,
                    "items": {"type": "object", "required": ["nodes", "symmetry"], "additionalProperties": False,
                              "properties": {"nodes": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                                             "symmetry": _SYMMETRY,
                                             "label": {"type": "string"}}},
                }
            },
        },
        "sim": {
            "type": "object", "required": ["k", "t_end", "initial_conditions"], "additionalProperties": False,
            "properties": {
                "k": {"type": "number", "minimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "h": {"type": "number", "exclusiveMinimum": 0},
                "record_every": {"type": "integer", "minimum": 1},
                "initial_conditions": {
                    "oneOf": [
                        {"type": "object", "required": ["distribution", "seed"], "additionalProperties": False,
                         "properties": {"distribution": {"enum": ["uniform", "standard-normal", "unit-circle"]},
                                        "seed": {"type": "integer"}, "lo": _NUMBER, "hi": _NUMBER}},
                        {"type": "object", "required": ["values"], "additionalProperties": False,
                         "properties": {"values": {"type": "array", "items": _NUMBER}}},
                    ]
                },
            },
        },
        "verify": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "pattern_tol": {"type": "number", "exclusiveMinimum": 0},
                "window_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "equivariance_samples": {"type": "integer", "minimum": 1},
                "equivariance_radius": {"type": "number", "exclusiveMinimum": 0},
                "equivariance_seed": {"type": "integer"},
            },
        },
    },
}


@dataclass(frozen=True)
class VerifySettings:
    pattern_tol: float = PATTERN_TOL
    window_fraction: float = WINDOW_FRACTION
    equivariance_samples: int = 200
    equivariance_radius: float = 5.0
    equivariance_seed: int = 42


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    topology: Topology
    dynamics: NodeDynamics
    partition: Partition
    config: SimConfig
    verify: VerifySettings
    canonical: dict = field(repr=False, compare=False)
    digest: str = ""

    @property
    def group_labels(self) -> list[list[int]]:
        return [[i + 1 for i in g] for g in self.partition.groups()]


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, float)):
        return float(value)
    return value


def canonical_digest(doc: dict) -> str:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def scenario_from_dict(raw: dict, source: str = "<scenario>") -> Scenario:
    """Validate a decoded scenario document and build every component."""
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        lines = [f"{source}: field '{_field_path(e)}': {e.message}" for e in errors[:10]]
        raise ScenarioError("schema violation\n" + "\n".join(lines))

    topo_raw = raw["topology"]
    if topo_raw.get("directed", False):
        raise ScenarioError(f"{source}: field 'topology/directed': directed graphs are not supported")
    try:
        topology = build_topology(topo_raw["nodes"], topo_raw["edges"])
    except TopologyError as exc:
        raise ScenarioError(f"{source}: field 'topology': {exc}") from None

    dyn_raw = raw["dynamics"]
    ctrl_raw = dyn_raw.get("controller")
    try:
        controller = make_controller(ctrl_raw["name"], ctrl_raw.get("params")) if ctrl_raw else None
        dynamics = make_dynamics(dyn_raw["name"], dyn_raw.get("params"), controller,
                                 dyn_raw.get("kind", "continuous"))
    except DynamicsError as exc:
        raise ScenarioError(f"{source}: field 'dynamics': {exc}") from None
    n = dynamics.state_dim

    groups_raw = raw.get("partition", {"groups": [{"nodes": list(range(1, topology.node_count + 1)),
                                                   "symmetry": "identity"}]})["groups"]
    try:
        symmetries = []
        for h, g in enumerate(groups_raw):
            sym = parse_symmetry(g["symmetry"], n, label=g.get("label", f"group{h + 1}"))
            if sym.dim != n:
                raise ScenarioError(f"{source}: field 'partition/groups/{h}/symmetry': acts on R^{sym.dim} "
                                    f"but the node state has dimension {n}")
            symmetries.append(sym)
        partition = build_multipartite_partition(topology.node_count, [g["nodes"] for g in groups_raw], symmetries)
    except (SymmetryError, PartitionError) as exc:
        raise ScenarioError(f"{source}: field 'partition': {exc}") from None

    sim_raw = raw["sim"]
    ic_raw = sim_raw["initial_conditions"]
    if "values" in ic_raw:
        if len(ic_raw["values"]) != n * topology.node_count:
            raise ScenarioError(f"{source}: field 'sim/initial_conditions/values': expected "
                                f"{n * topology.node_count} entries, got {len(ic_raw['values'])}")
        ic: InitialConditions | tuple = tuple(float(v) for v in ic_raw["values"])
        ic_canon = {"values": list(ic)}
    else:
        ic = InitialConditions(ic_raw["distribution"], int(ic_raw["seed"]),
                               float(ic_raw.get("lo", -1.0)), float(ic_raw.get("hi", 1.0)))
        if ic.distribution == "unit-circle" and n != 2:
            raise ScenarioError(f"{source}: field 'sim/initial_conditions': unit-circle needs 2-dimensional nodes")
        ic_canon = {"distribution": ic.distribution, "seed": ic.seed, "lo": ic.lo, "hi": ic.hi}
    try:
        config = SimConfig(float(sim_raw["k"]), float(sim_raw["t_end"]), float(sim_raw.get("h", 1e-3)),
                           int(sim_raw.get("record_every", 10)), ic)
    except SimulationError as exc:
        raise ScenarioError(f"{source}: field 'sim': {exc}") from None

    ver_raw = raw.get("verify", {})
    verify = VerifySettings(**{k: type(getattr(VerifySettings, k))(v) for k, v in ver_raw.items()})

    canonical = {
        "name": raw.get("name", ""),
        "description": raw.get("description", ""),
        "topology": {"nodes": topology.node_count, "edges": topology.edge_list_1based(), "directed": False},
        "dynamics": {
            "name": dynamics.name,
            "params": _file_params(dynamics),
            "kind": dynamics.kind,
            "controller": None if controller is None else {"name": controller.name,
                                                           "params": dict(sorted(controller.params.items()))},
        },
        "partition": {"groups": [
            {"nodes": sorted(int(v) for v in g["nodes"]), "symmetry": _canonical_symmetry(g["symmetry"]),
             "label": symmetries[h].label}
            for h, g in enumerate(groups_raw)
        ]},
        "sim": {"k": config.k, "t_end": config.t_end, "h": config.h, "record_every": config.record_every,
                "initial_conditions": ic_canon},
        "verify": {"pattern_tol": verify.pattern_tol, "window_fraction": verify.window_fraction,
                   "equivariance_samples": verify.equivariance_samples,
                   "equivariance_radius": verify.equivariance_radius,
                   "equivariance_seed": verify.equivariance_seed},
    }
    return Scenario(canonical["name"], canonical["description"], topology, dynamics, partition, config,
                    verify, canonical, canonical_digest(canonical))


def _file_params(dynamics: NodeDynamics) -> dict:
    # sized entries are configured by their order n, not by the derived matrices
    if dynamics.name == "integrator_chain":
        return {"K": _jsonable(dynamics.params["K"]), "n": dynamics.state_dim}
    if dynamics.name == "zero":
        return {"n": dynamics.state_dim}
    return {k: _jsonable(v) for k, v in sorted(dynamics.params.items())}


def _canonical_symmetry(spec):
    if isinstance(spec, str):
        return spec
    out = {k: _jsonable(v) for k, v in spec.items() if k != "label"}
    return out


def scenario_to_dict(sc: Scenario) -> dict:
    return json.loads(json.dumps(sc.canonical))


def dumps(sc: Scenario) -> str:
    return json.dumps(sc.canonical, indent=2, sort_keys=True) + "\n"


def parse_scenario(path) -> Scenario:
    """Read, validate and canonicalise a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(raw, str(path))


def shipped_scenarios() -> list[str]:
    root = resources.files("sympat") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def shipped_path(name: str) -> Path:
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("sympat") / "scenarios" / name))


def load_shipped(name: str) -> Scenario:
    return parse_scenario(shipped_path(name))
