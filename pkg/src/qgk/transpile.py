"""Lowering of decoded circuits to a backend's native gates and coupling map,
and the gate-dependency depth metric.

Pipeline used by :func:`route`:

1. every source gate becomes single-qubit matrices and CX gates;
2. CX gates on uncoupled qubits get SWAP chains (3 CX each) along a shortest
   path, moving the control next to the target; the layout change is tracked;
3. each CX is rewritten with the native two-qubit gate, reversing it with
   Hadamard conjugation when only the opposite direction is coupled;
4. runs of single-qubit matrices are multiplied together and re-synthesised
   as RZ / SX / X sequences.

All rewrites hold up to global phase.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from math import atan2, pi
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate, GateKind, gate_unitary
from .errors import ConfigError

_EPS = 1e-12
_H = gate_unitary(GateKind.H)
_NATIVE_1Q = {k: gate_unitary(k) for k in (GateKind.X, GateKind.SX)}

# CX = kron(_CX_POST_C, _CX_POST_T) @ ECR  (up to global phase)
_CX_POST_C = gate_unitary(GateKind.RZ, pi / 2) @ np.diag([1, -1]).astype(complex) @ gate_unitary(GateKind.X)
_CX_POST_T = gate_unitary(GateKind.RX, pi / 2) @ gate_unitary(GateKind.X)

_NATIVE_2Q_PREFERENCE = (GateKind.ECR, GateKind.CZ, GateKind.CX)
_ONE_QUBIT_BASIS = frozenset({GateKind.RZ, GateKind.SX, GateKind.X})


@dataclass(frozen=True)
class BackendModel:
    name: str
    basis_gates: frozenset
    edges: tuple[tuple[int, int], ...]
    num_qubits: int
    directed: bool = True

    def __post_init__(self):
        basis = frozenset(GateKind.parse(g) for g in self.basis_gates)
        object.__setattr__(self, "basis_gates", basis)
        edges = tuple((int(a), int(b)) for a, b in self.edges)
        object.__setattr__(self, "edges", edges)
        if not _ONE_QUBIT_BASIS <= basis:
            raise ValueError("basis must contain RZ, SX and X")
        if not any(g in basis for g in _NATIVE_2Q_PREFERENCE):
            raise ValueError("basis needs a two-qubit gate (ECR, CZ or CX)")
        for a, b in edges:
            if a == b or not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"edge {(a, b)} invalid for {self.num_qubits} qubits")

    @property
    def two_qubit_gate(self) -> GateKind:
        return next(g for g in _NATIVE_2Q_PREFERENCE if g in self.basis_gates)

    @property
    def direction_bound(self) -> bool:
        return self.directed and self.two_qubit_gate is not GateKind.CZ

    def adjacency(self) -> list[list[int]]:
        adj = [set() for _ in range(self.num_qubits)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return [sorted(s) for s in adj]

    def allows(self, control: int, target: int) -> bool:
        """True if the native two-qubit gate may run with this orientation."""
        if (control, target) in self.edges:
            return True
        return not self.direction_bound and (target, control) in self.edges

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "basis_gates": sorted(g.value for g in self.basis_gates),
            "qubits": self.num_qubits,
            "edges": [list(e) for e in self.edges],
            "directed": self.directed,
        }


def backend_from_json(doc: dict) -> BackendModel:
    try:
        edges = [tuple(e) for e in doc["edges"]]
        nq = doc.get("qubits")
        if nq is None:
            qubits = {q for e in edges for q in e}
            for site in doc.get("sites", []):
                qubits.update(site["qubits"] if isinstance(site, dict) else site)
            nq = max(qubits) + 1
        return BackendModel(
            name=str(doc.get("name", "backend")),
            basis_gates=frozenset(doc.get("basis_gates", ("I", "RZ", "SX", "X", "ECR"))),
            edges=tuple(edges),
            num_qubits=int(nq),
            directed=bool(doc.get("directed", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid backend description: {exc!r}") from None


def load_backend(path) -> BackendModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read backend file {path}: {exc}") from None
    return backend_from_json(doc)


def chain_backend(num_qubits: int = 4, pattern: str | None = None, two_qubit: str = "ECR",
                  name: str | None = None) -> BackendModel:
    """Linear chain; ``pattern`` gives each link's direction as '>' or '<'.

    The default for four qubits is the directional chain '>><'.
    """
    if pattern is None:
        pattern = ">><" if num_qubits == 4 else ">" * (num_qubits - 1)
    if len(pattern) != num_qubits - 1 or set(pattern) - {">", "<"}:
        raise ValueError(f"bad chain pattern {pattern!r}")
    edges = tuple((i, i + 1) if p == ">" else (i + 1, i) for i, p in enumerate(pattern))
    return BackendModel(name or f"chain{num_qubits}", frozenset({"I", "RZ", "SX", "X", two_qubit}), edges,
                        num_qubits, directed=two_qubit != "CZ")


def line_with_branch_backend(num_qubits: int = 12, branch_at: int = 5, two_qubit: str = "ECR") -> BackendModel:
    """Line 0-1-...-(Q-2) plus qubit Q-1 hanging off ``branch_at``."""
    edges = [(i, i + 1) for i in range(num_qubits - 2)] + [(branch_at, num_qubits - 1)]
    return BackendModel(f"line{num_qubits}_branch", frozenset({"I", "RZ", "SX", "X", two_qubit}),
                        tuple(edges), num_qubits)


@dataclass(frozen=True)
class TranspiledCircuit:
    circuit: Circuit
    final_layout: tuple[int, ...]
    source: Circuit = field(repr=False)
    swaps: int = 0


# ---------------------------------------------------------------------------
# single-qubit synthesis


def _wrap(angle: float) -> float:
    a = (angle + pi) % (2 * pi) - pi
    return pi if a <= -pi + _EPS else a


def euler_gates(u: np.ndarray, qubit: int, atol: float = 1e-10) -> list[Gate]:
    """RZ/SX/X sequence equal to ``u`` up to global phase."""
    for kind in (GateKind.X, GateKind.SX):
        if abs(abs(np.trace(_NATIVE_1Q[kind].conj().T @ u)) / 2 - 1) < atol:
            return [Gate(kind, (qubit,))]
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    theta = 2 * atan2(s, c)
    total = 2 * np.angle(v[1, 1]) if c > atol else 0.0
    diff = 2 * np.angle(v[1, 0]) if s > atol else 0.0
    phi, lam = (total + diff) / 2, (total - diff) / 2

    def rz(a):
        a = _wrap(a)
        return [] if abs(a) < atol else [Gate(GateKind.RZ, (qubit,), a)]

    sx = [Gate(GateKind.SX, (qubit,))]
    if s < atol:
        return rz(phi + lam)
    if c < atol:
        return rz(lam + pi) + [Gate(GateKind.X, (qubit,))] + rz(phi)
    if abs(theta - pi / 2) < atol:
        return rz(lam - pi / 2) + sx + rz(phi + pi / 2)
    return rz(lam) + sx + rz(theta + pi) + sx + rz(phi + pi)


# ---------------------------------------------------------------------------
# intermediate representation: ("u", q, matrix) | ("cx", c, t) | ("2q", kind, c, t)


def _source_ops(circuit: Circuit):
    for g in circuit.gates:
        k = g.kind
        if k is GateKind.I:
            continue
        if k.num_qubits == 1:
            yield ("u", g.qubits[0], gate_unitary(k, g.angle))
            continue
        c, t = g.qubits
        if k is GateKind.CX:
            yield ("cx", c, t)
        elif k is GateKind.CZ:
            yield from (("u", t, _H), ("cx", c, t), ("u", t, _H))
        elif k is GateKind.ECR:
            yield from (("cx", c, t), ("u", c, _CX_POST_C.conj().T), ("u", t, _CX_POST_T.conj().T))
        else:
            rot = {GateKind.CRX: GateKind.RZ, GateKind.CRY: GateKind.RY, GateKind.CRZ: GateKind.RZ}[k]
            half = g.angle / 2
            body = [("u", t, gate_unitary(rot, half)), ("cx", c, t), ("u", t, gate_unitary(rot, -half)), ("cx", c, t)]
            if k is GateKind.CRX:
                body = [("u", t, _H)] + body + [("u", t, _H)]
            yield from body


def _lower_cx(c: int, t: int, two_q: GateKind, allows):
    """Native rendering of CX(c -> t)."""
    if two_q is GateKind.CZ:
        return [("u", t, _H), ("2q", GateKind.CZ, c, t), ("u", t, _H)]
    if allows(c, t):
        if two_q is GateKind.CX:
            return [("2q", GateKind.CX, c, t)]
        return [("2q", GateKind.ECR, c, t), ("u", c, _CX_POST_C), ("u", t, _CX_POST_T)]
    if allows(t, c):
        flip = [("u", c, _H), ("u", t, _H)]
        return flip + _lower_cx(t, c, two_q, allows) + flip
    raise ValueError(f"qubits {c} and {t} are not coupled")


def _synthesise(ops, num_qubits: int) -> list[Gate]:
    pending: dict[int, np.ndarray] = {}
    out: list[Gate] = []

    def flush(q):
        m = pending.pop(q, None)
        if m is not None:
            out.extend(euler_gates(m, q))

    for op in ops:
        if op[0] == "u":
            _, q, m = op
            pending[q] = m @ pending[q] if q in pending else m
        else:
            _, kind, c, t = op
            flush(c)
            flush(t)
            out.append(Gate(kind, (c, t)))
    for q in sorted(pending):
        flush(q)
    return out


def _is_legal(circuit: Circuit, backend: BackendModel) -> bool:
    for g in circuit.gates:
        if g.kind not in backend.basis_gates or g.kind is GateKind.I:
            return False
        if g.kind.num_qubits == 2 and not backend.allows(*g.qubits):
            return False
    return True


def decompose_to_basis(circuit: Circuit, basis) -> Circuit:
    """Rewrite into ``basis`` assuming all-to-all, orientation-free coupling."""
    basis = frozenset(GateKind.parse(b) for b in basis)
    if all(g.kind in basis and g.kind is not GateKind.I for g in circuit.gates):
        return circuit
    backend = BackendModel("all-to-all", basis, (), circuit.num_qubits, directed=False)
    two_q = backend.two_qubit_gate
    ops = []
    for op in _source_ops(circuit):
        ops.extend(_lower_cx(op[1], op[2], two_q, lambda c, t: True) if op[0] == "cx" else [op])
    return Circuit(circuit.num_qubits, _synthesise(ops, circuit.num_qubits))


def _shortest_path(adj, src: int, dst: int) -> list[int]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if dst not in prev:
        raise ValueError(f"qubits {src} and {dst} are disconnected")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def route(circuit: Circuit, backend: BackendModel) -> TranspiledCircuit:
    """Map a circuit onto ``backend`` (identity initial layout).

    The result equals ``P @ U`` up to global phase, where ``U`` is the source
    unitary and ``P`` moves logical qubit i onto physical ``final_layout[i]``.
    """
    nq = backend.num_qubits
    if circuit.num_qubits > nq:
        raise ValueError(f"circuit needs {circuit.num_qubits} qubits, backend has {nq}")
    layout = list(range(nq))
    if _is_legal(circuit, backend):
        return TranspiledCircuit(Circuit(nq, circuit.gates), tuple(layout), circuit)
    phys_of = layout
    log_of = list(range(nq))
    adj = backend.adjacency()
    two_q = backend.two_qubit_gate
    ops = []
    n_swaps = 0

    def cx(c, t):
        ops.extend(_lower_cx(c, t, two_q, backend.allows))

    for op in _source_ops(circuit):
        if op[0] == "u":
            ops.append(("u", phys_of[op[1]], op[2]))
            continue
        c, t = phys_of[op[1]], phys_of[op[2]]
        if t not in adj[c]:
            path = _shortest_path(adj, c, t)
            for p0, p1 in zip(path[:-2], path[1:-1]):
                a, b = (p0, p1) if backend.allows(p0, p1) else (p1, p0)
                cx(a, b)
                cx(b, a)
                cx(a, b)
                n_swaps += 1
                l0, l1 = log_of[p0], log_of[p1]
                log_of[p0], log_of[p1] = l1, l0
                phys_of[l0], phys_of[l1] = p1, p0
            c = path[-2]
        cx(c, t)
    return TranspiledCircuit(Circuit(nq, _synthesise(ops, nq)), tuple(phys_of), circuit, n_swaps)


transpile = route


def depth(circuit: Circuit) -> int:
    """Longest chain of gates linked by shared qubits, in list order."""
    level: dict[int, int] = {}
    best = 0
    for g in circuit.gates:
        d = 1 + max(level.get(q, 0) for q in g.qubits)
        for q in g.qubits:
            level[q] = d
        best = max(best, d)
    return best
