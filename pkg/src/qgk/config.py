"""JSON run configuration -> (GaConfig, BackendModel)."""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .ga import GaConfig
from .genome import GeneConfig
from .transpile import BackendModel, backend_from_json, chain_backend, load_backend

REQUIRED = ("population", "generations", "parents", "elitism", "mutation_rate", "crossover_prob", "genes")
OPTIONAL = ("eta", "objective", "seed", "svm_c", "folds", "selection", "patience", "noise_std", "shots",
            "svm_tol", "backend")
GENE_KEYS = ("qubits", "circuit_size", "allowed_gates", "constrain_to_backend", "layout")


def default_backend(num_qubits: int) -> BackendModel:
    return chain_backend(num_qubits)


def parse_run_config(doc: dict, num_features: int, base_dir: Path | None = None) -> tuple[GaConfig, BackendModel]:
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object")
    missing = [k for k in REQUIRED if k not in doc]
    if missing:
        raise ConfigError(f"run config missing required field(s): {', '.join(missing)}")
    unknown = sorted(set(doc) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise ConfigError(f"unknown run config field(s): {', '.join(unknown)}")
    genes = doc["genes"]
    if not isinstance(genes, dict) or not {"qubits", "circuit_size", "allowed_gates"} <= set(genes):
        raise ConfigError("genes needs qubits, circuit_size and allowed_gates")
    unknown = sorted(set(genes) - set(GENE_KEYS))
    if unknown:
        raise ConfigError(f"unknown genes field(s): {', '.join(unknown)}")
    try:
        nq = int(genes["qubits"])
        entry = doc.get("backend")
        if entry is None:
            backend = default_backend(nq)
        elif isinstance(entry, str):
            path = Path(entry)
            backend = load_backend(path if path.is_absolute() or base_dir is None else base_dir / path)
        else:
            backend = backend_from_json(entry)
        gene_cfg = GeneConfig(
            num_qubits=nq,
            circuit_size=int(genes["circuit_size"]),
            num_features=int(num_features),
            allowed_gates=tuple(genes["allowed_gates"]),
            connectivity=backend.edges if genes.get("constrain_to_backend", False) else None,
            layout=genes.get("layout", "layer"),
        )
        kwargs = {k: doc[k] for k in OPTIONAL if k in doc and k != "backend"}
        cfg = GaConfig(
            genes=gene_cfg,
            population=int(doc["population"]),
            generations=int(doc["generations"]),
            parents=int(doc["parents"]),
            elitism=int(doc["elitism"]),
            mutation_rate=float(doc["mutation_rate"]),
            crossover_prob=float(doc["crossover_prob"]),
            **kwargs,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid run config: {exc}") from None
    return cfg, backend


def load_run_config(path, num_features: int) -> tuple[GaConfig, BackendModel]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return parse_run_config(doc, num_features, path.parent)
