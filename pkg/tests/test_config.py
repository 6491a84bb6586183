import json

import pytest

from qgk.config import load_run_config, parse_run_config
from qgk.errors import ConfigError

BASE = {"population": 10, "generations": 5, "parents": 5, "elitism": 1, "mutation_rate": 0.05,
        "crossover_prob": 0.9, "genes": {"qubits": 4, "circuit_size": 4, "allowed_gates": ["I", "RZ", "ECR"]}}


def test_minimal_config_defaults():
    cfg, backend = parse_run_config(BASE, 6)
    assert cfg.genes.length == 96 and cfg.genes.num_features == 6
    assert cfg.eta == 0.025 and cfg.objective == "mono" and cfg.genes.connectivity is None
    assert backend.name == "chain4"


def test_backend_path_relative_to_config(tmp_path):
    (tmp_path / "b.json").write_text(json.dumps({"qubits": 4, "edges": [[0, 1], [1, 2], [2, 3]]}))
    doc = dict(BASE, backend="b.json", genes=dict(BASE["genes"], constrain_to_backend=True))
    (tmp_path / "run.json").write_text(json.dumps(doc))
    cfg, backend = load_run_config(tmp_path / "run.json", 3)
    assert backend.edges == ((0, 1), (1, 2), (2, 3))
    assert cfg.genes.connectivity == backend.edges


def test_inline_backend():
    doc = dict(BASE, backend={"qubits": 4, "edges": [[1, 0], [1, 2], [2, 3]]})
    assert parse_run_config(doc, 2)[1].edges[0] == (1, 0)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("population"),
    lambda d: d.update(colour="red"),
    lambda d: d.update(elitism=20),
    lambda d: d.update(objective="both"),
    lambda d: d["genes"].pop("qubits"),
    lambda d: d["genes"].update(extra=1),
    lambda d: d["genes"].update(allowed_gates=["FOO"]),
    lambda d: d.update(population="many"),
])
def test_schema_violations(mutate):
    doc = json.loads(json.dumps(BASE))
    mutate(doc)
    with pytest.raises(ConfigError):
        parse_run_config(doc, 4)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json", 4)
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "bad.json", 4)
