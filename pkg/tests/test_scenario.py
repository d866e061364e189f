import json

import numpy as np
import pytest

from sympat.scenario import (ScenarioError, dumps, load_shipped, parse_scenario, scenario_from_dict,
                             scenario_to_dict, shipped_path, shipped_scenarios)

BASE = {
    "name": "tiny",
    "topology": {"nodes": 3, "edges": [[1, 2], [2, 3]]},
    "dynamics": {"name": "harmonic", "params": {"omega": 2}},
    "partition": {"groups": [{"nodes": [1, 3], "symmetry": "identity"},
                             {"nodes": [2], "symmetry": {"rotation2d": 90}}]},
    "sim": {"k": 3, "t_end": 2, "initial_conditions": {"distribution": "unit-circle", "seed": 5}},
}


def with_(path, value):
    doc = json.loads(json.dumps(BASE))
    node = doc
    keys = path.split("/")
    for k in keys[:-1]:
        node = node[int(k)] if isinstance(node, list) else node[k]
    if value is KeyError:
        del node[keys[-1]]
    else:
        node[keys[-1]] = value
    return doc


def test_shipped_corpus():
    assert shipped_scenarios() == ["discrete_signed_consensus.json", "fn_antisync.json", "fn_asymmetric.json",
                                   "harmonic_tripartite.json", "pitchfork_design.json"]


def test_fn_shipped(fn_scenario):
    sc = fn_scenario
    assert sc.topology.node_count == 5 and sc.config.k == 1.0
    np.testing.assert_array_equal(sc.partition.group_symmetries[1].matrix, -np.eye(2))
    assert sc.group_labels == [[1, 3], [2, 4, 5]]
    assert sc.dynamics.params == {"a": 0.0, "b": 0.8, "c": 3.0, "I": 0.0}


def test_pitchfork_shipped(pitchfork_scenario):
    sc = pitchfork_scenario
    assert sc.config.k == 10.0 and sc.dynamics.controller.params == {"alpha": 5.0, "beta": 1.0}
    np.testing.assert_array_equal(sc.partition.group_symmetries[1].matrix, [[-1.0]])


def test_harmonic_shipped(harmonic_scenario):
    sc = harmonic_scenario
    assert sc.topology.node_count == 10 and sc.config.k == 10.0
    assert sc.dynamics.params["omega"] == 1.0
    assert sc.config.initial_conditions.distribution == "unit-circle"
    assert sc.group_labels == [[2, 5, 7, 10], [1, 4, 6, 9], [3, 8]]


@pytest.mark.parametrize("name", ["fn_antisync", "pitchfork_design", "harmonic_tripartite",
                                  "discrete_signed_consensus", "fn_asymmetric"])
def test_parse_serialize_parse_fixed_point(name, tmp_path):
    first = load_shipped(name)
    out = tmp_path / "again.json"
    out.write_text(dumps(first))
    second = parse_scenario(out)
    assert second.digest == first.digest
    assert scenario_to_dict(second) == scenario_to_dict(first)
    out.write_text(dumps(second))
    assert parse_scenario(out).digest == first.digest


def test_digest_tracks_content():
    a = scenario_from_dict(BASE)
    assert scenario_from_dict(json.loads(json.dumps(BASE))).digest == a.digest
    assert scenario_from_dict(with_("sim/k", 3.5)).digest != a.digest
    # equivalent spellings canonicalise identically
    spelled = with_("topology/edges", [[2, 1], [3, 2], [1, 2]])
    assert scenario_from_dict(spelled).digest == a.digest


def test_defaults_filled():
    sc = scenario_from_dict(with_("partition", KeyError))
    assert sc.partition.group_count == 1
    assert sc.config.h == 1e-3 and sc.config.record_every == 10
    assert sc.verify.pattern_tol == 1e-3 and sc.verify.window_fraction == 0.2


@pytest.mark.parametrize("path, value, fragment", [
    ("sim/k", "fast", "sim/k"),
    ("topology/nodes", 0, "topology/nodes"),
    ("dynamics/name", "lorenz", "dynamics"),
    ("topology/edges", [[1, 2]], "disconnected"),
    ("topology/edges", [[1, 1], [1, 2], [2, 3]], "self-loop"),
    ("topology/directed", True, "directed"),
    ("partition/groups/1/symmetry", {"matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}, "dimension 2"),
    ("partition/groups/1/symmetry", {"matrix": [[1, 1], [0, 1]]}, "not orthogonal"),
    ("partition/groups/1/nodes", [2, 3], "appears in groups"),
    ("sim/initial_conditions", {"values": [1, 2, 3]}, "expected 6"),
    ("sim/h", -1, "sim/h"),
    ("sim/k", -1, "sim/k.*minimum"),
    ("extra", 1, "Additional properties"),
])
def test_invalid_documents(path, value, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        scenario_from_dict(with_(path, value), "doc.json")


def test_json_syntax_error_has_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "name": "x",\n  "topology": {"nodes": 2,,}\n}\n')
    with pytest.raises(ScenarioError, match="line 3, column"):
        parse_scenario(bad)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        parse_scenario(tmp_path / "nope.json")


def test_explicit_initial_values():
    sc = scenario_from_dict(with_("sim/initial_conditions", {"values": [1, 0, 0, 1, -1, 0]}))
    np.testing.assert_array_equal(sc.config.initial_state(3, 2), [1, 0, 0, 1, -1, 0])


def test_shipped_path_accepts_bare_name():
    assert shipped_path("fn_antisync") == shipped_path("fn_antisync.json")
    assert shipped_path("fn_antisync").exists()
