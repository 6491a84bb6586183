"""Integer gene encoding of feature-map circuits.

Each gate slot is a block of six genes::

    0  gate type            [0, N)      index into ``allowed_gates``
    1  transformation T     [0, 2]
    2  multi-feature MF     [0, 1]
    3  first feature index  [0, F - 1]
    4  second feature index [0, F - 1]
    5  second qubit         [0, Q - 2]  skip-encoded target (never equals the acting qubit)

A chromosome holds ``Q * S`` blocks. Block ``g`` acts on qubit ``g % Q`` in
layer-major layout (default) or ``g // S`` in qubit-major layout; blocks are
applied in array order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .circuit import Circuit, Gate, GateKind
from .errors import ConfigError

GENES_PER_GATE = 6


@dataclass(frozen=True)
class GeneConfig:
    num_qubits: int
    circuit_size: int
    num_features: int
    allowed_gates: tuple[GateKind, ...]
    connectivity: tuple[tuple[int, int], ...] | None = None
    layout: str = "layer"

    def __post_init__(self):
        gates = tuple(GateKind.parse(g) for g in self.allowed_gates)
        object.__setattr__(self, "allowed_gates", gates)
        if not gates:
            raise ValueError("allowed_gates is empty")
        if self.num_qubits < 1 or self.circuit_size < 1 or self.num_features < 1:
            raise ValueError("qubits, circuit size and features must be positive")
        if self.num_qubits < 2 and any(g.num_qubits == 2 for g in gates):
            raise ValueError("two-qubit gates need at least two qubits")
        if self.layout not in ("layer", "qubit"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.connectivity is not None:
            edges = tuple((int(a), int(b)) for a, b in self.connectivity)
            object.__setattr__(self, "connectivity", edges)
            touched = {q for e in edges for q in e}
            for a, b in edges:
                if a == b or not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                    raise ValueError(f"bad connectivity edge {(a, b)}")
            if touched != set(range(self.num_qubits)):
                raise ValueError("every qubit needs at least one connectivity edge")

    @property
    def num_blocks(self) -> int:
        return self.num_qubits * self.circuit_size

    @property
    def length(self) -> int:
        return GENES_PER_GATE * self.num_blocks

    @property
    def gene_upper(self) -> np.ndarray:
        """Exclusive upper bound of every gene (lower bound is always 0)."""
        block = [len(self.allowed_gates), 3, 2, self.num_features, self.num_features, max(self.num_qubits - 1, 1)]
        return np.tile(np.array(block, dtype=np.int64), self.num_blocks)

    def neighbors(self, q: int) -> list[int]:
        """Sorted undirected neighbours of ``q`` under the connectivity map."""
        return sorted({b for a, b in self.connectivity if a == q} | {a for a, b in self.connectivity if b == q})

    def acting_qubit(self, block: int) -> int:
        if self.layout == "layer":
            return block % self.num_qubits
        return block // self.circuit_size

    def to_json(self) -> dict:
        out = {
            "qubits": self.num_qubits,
            "circuit_size": self.circuit_size,
            "features": self.num_features,
            "allowed_gates": [g.value for g in self.allowed_gates],
        }
        if self.connectivity is not None:
            out["connectivity"] = [list(e) for e in self.connectivity]
        if self.layout != "layer":
            out["layout"] = self.layout
        return out


def validate_genes(genes, cfg: GeneConfig) -> np.ndarray:
    g = np.asarray(genes)
    if g.shape != (cfg.length,):
        raise ValueError(f"expected {cfg.length} genes, got shape {g.shape}")
    if not np.issubdtype(g.dtype, np.integer):
        if not np.all(np.mod(g, 1) == 0):
            raise ValueError("genes must be integers")
    g = g.astype(np.int64)
    bad = np.flatnonzero((g < 0) | (g >= cfg.gene_upper))
    if bad.size:
        i = int(bad[0])
        raise ValueError(f"gene {i} (block {i // 6}, position {i % 6}) = {g[i]} out of range")
    return g


def random_chromosome(cfg: GeneConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, cfg.gene_upper)


def transform_angle(transform, multi, xi, xj=0.0):
    """Gene-dependent rotation argument from one or two features in [0, 1].

    Vectorised over ``xi``/``xj``. MF=0 ignores ``xj``.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    if np.any((xi < 0) | (xi > 1)) or np.any((xj < 0) | (xj > 1)):
        raise ValueError("features must lie in [0, 1]")
    pi = np.pi
    if transform == 0:
        out = 2 * pi * (xi - 0.5) if not multi else 2 * pi * xi * (1 - xj) - pi
    elif transform == 1:
        if not multi:
            out = 2 * pi * (xi - 0.5) * (1 - xi) - pi
        else:
            out = (2 * pi * (xi - 0.5) * (1 - xj) - pi) * (2 * pi * (xj - 0.5) * (1 - xi) - pi) / pi
    elif transform == 2:
        out = 2 * np.arcsin(2 * xi - 1) - pi if not multi else 2 * np.arcsin((2 * xi - 1) * (2 * xj - 1)) - pi
    else:
        raise ValueError(f"transformation gene must be 0, 1 or 2, got {transform}")
    return out if np.ndim(out) else float(out)


class GateSlot(NamedTuple):
    """A decoded gate whose angle (if any) is still a function of the features."""

    kind: GateKind
    qubits: tuple[int, ...]
    transform: int = 0
    multi: int = 0
    first: int = 0
    second: int = 0

    def angles(self, features: np.ndarray):
        """Angle(s) for one feature vector or a (n, F) matrix."""
        f = np.asarray(features)
        xi = f[..., self.first]
        xj = f[..., self.second] if self.multi else 0.0
        return transform_angle(self.transform, self.multi, xi, xj)


def decode_slots(genes, cfg: GeneConfig) -> list[GateSlot]:
    g = np.asarray(genes).reshape(cfg.num_blocks, GENES_PER_GATE)
    slots = []
    for block, (gt, t, mf, fi, fj, sq) in enumerate(g.tolist()):
        kind = cfg.allowed_gates[gt]
        if kind is GateKind.I:
            continue
        q = cfg.acting_qubit(block)
        if kind.num_qubits == 2:
            if cfg.connectivity is None:
                target = sq if sq < q else sq + 1
            else:
                nbrs = cfg.neighbors(q)
                target = nbrs[sq % len(nbrs)]
            qubits = (q, target)
        else:
            qubits = (q,)
        if kind.parametric:
            slots.append(GateSlot(kind, qubits, t, mf, fi, fj if mf else 0))
        else:
            slots.append(GateSlot(kind, qubits))
    return slots


def decode(genes, cfg: GeneConfig, x: Sequence[float]) -> Circuit:
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.num_features,):
        raise ValueError(f"expected {cfg.num_features} features, got {x.shape}")
    gates = []
    for s in decode_slots(genes, cfg):
        angle = float(s.angles(x)) if s.kind.parametric else None
        gates.append(Gate(s.kind, s.qubits, angle))
    return Circuit(cfg.num_qubits, gates)


def decode_skeleton(genes, cfg: GeneConfig) -> Circuit:
    """Structure-only circuit with every angle set to 1.0 (for depth and transpilation)."""
    gates = [Gate(s.kind, s.qubits, 1.0 if s.kind.parametric else None) for s in decode_slots(genes, cfg)]
    return Circuit(cfg.num_qubits, gates)


def write_chromosome(path, genes, cfg: GeneConfig, **extra) -> None:
    g = validate_genes(genes, cfg)
    doc = cfg.to_json()
    doc.update(extra)
    doc["genes"] = [int(v) for v in g]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_chromosome(path) -> tuple[np.ndarray, GeneConfig]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read chromosome file {path}: {exc}") from None
    return chromosome_from_json(doc)


def chromosome_from_json(doc: dict) -> tuple[np.ndarray, GeneConfig]:
    if not isinstance(doc, dict):
        raise ConfigError("chromosome file must hold a JSON object")
    missing = [k for k in ("qubits", "circuit_size", "features", "allowed_gates", "genes") if k not in doc]
    if missing:
        raise ConfigError(f"chromosome file missing field(s): {', '.join(missing)}")
    try:
        cfg = GeneConfig(
            num_qubits=int(doc["qubits"]),
            circuit_size=int(doc["circuit_size"]),
            num_features=int(doc["features"]),
            allowed_gates=tuple(doc["allowed_gates"]),
            connectivity=tuple(map(tuple, doc["connectivity"])) if doc.get("connectivity") else None,
            layout=doc.get("layout", "layer"),
        )
        genes = validate_genes(np.array(doc["genes"]), cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid chromosome: {exc}") from None
    return genes, cfg
