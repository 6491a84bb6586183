"""Gate alphabet, circuit container and a dense statevector simulator.

Conventions
-----------
* Qubit 0 is the least-significant bit of the amplitude index.
* Two-qubit matrices are written in the (control, target) basis with the
  control as the most-significant local bit, i.e. ``kron(A_control, B_target)``.
* ``ECR = (X (x) I - Y (x) X) / sqrt(2)`` in that basis.
* Global phase is never tracked; use :func:`unitary_fidelity` for comparisons.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 16


class GateKind(str, enum.Enum):
    I = "I"
    H = "H"
    X = "X"
    SX = "SX"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CX = "CX"
    CZ = "CZ"
    ECR = "ECR"
    CRX = "CRX"
    CRY = "CRY"
    CRZ = "CRZ"

    @property
    def num_qubits(self) -> int:
        return 2 if self in _TWO_QUBIT else 1

    @property
    def parametric(self) -> bool:
        return self in _PARAMETRIC

    @classmethod
    def parse(cls, name: str | GateKind) -> GateKind:
        if isinstance(name, GateKind):
            return name
        key = str(name).strip().upper()
        if key == "ID":
            key = "I"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown gate kind {name!r}") from None


_TWO_QUBIT = frozenset({GateKind.CX, GateKind.CZ, GateKind.ECR, GateKind.CRX, GateKind.CRY, GateKind.CRZ})
_PARAMETRIC = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.CRX, GateKind.CRY, GateKind.CRZ})


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if len(self.qubits) != self.kind.num_qubits:
            raise ValueError(f"{self.kind.value} acts on {self.kind.num_qubits} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if self.kind.parametric != (self.angle is not None):
            raise ValueError(f"angle must be given iff {self.kind.value} is parametric")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g} out of range for {self.num_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def count(self, kind: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind is kind)


# ---------------------------------------------------------------------------
# gate matrices

_S2 = 1.0 / np.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

_FIXED = {
    GateKind.I: IDENTITY,
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    GateKind.X: PAULI_X,
    GateKind.SX: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    GateKind.CX: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.ECR: (np.kron(PAULI_X, IDENTITY) - np.kron(PAULI_Y, PAULI_X)) * _S2,
}
for _m in _FIXED.values():
    _m.setflags(write=False)


def _rotations(kind: GateKind, angles: np.ndarray) -> np.ndarray:
    """Stack of single-qubit rotation matrices, shape (len(angles), 2, 2)."""
    half = np.asarray(angles, dtype=float) / 2.0
    c, s = np.cos(half), np.sin(half)
    out = np.empty(half.shape + (2, 2), dtype=complex)
    if kind is GateKind.RX:
        out[..., 0, 0] = c
        out[..., 0, 1] = -1j * s
        out[..., 1, 0] = -1j * s
        out[..., 1, 1] = c
    elif kind is GateKind.RY:
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    elif kind is GateKind.RZ:
        out[..., 0, 0] = np.exp(-1j * half)
        out[..., 0, 1] = 0
        out[..., 1, 0] = 0
        out[..., 1, 1] = np.exp(1j * half)
    else:
        raise ValueError(f"{kind} is not a rotation")
    return out


_BASE_ROTATION = {GateKind.CRX: GateKind.RX, GateKind.CRY: GateKind.RY, GateKind.CRZ: GateKind.RZ}


def gate_matrices(kind: GateKind, angles: np.ndarray) -> np.ndarray:
    """Batched unitaries of a parametric gate, shape (len(angles), d, d)."""
    if kind in _BASE_ROTATION:
        rot = _rotations(_BASE_ROTATION[kind], angles)
        out = np.zeros(rot.shape[:-2] + (4, 4), dtype=complex)
        out[..., 0, 0] = 1
        out[..., 1, 1] = 1
        out[..., 2:, 2:] = rot
        return out
    return _rotations(kind, angles)


def gate_unitary(kind: GateKind | str, angle: float | None = None) -> np.ndarray:
    kind = GateKind.parse(kind)
    if kind.parametric:
        if angle is None:
            raise ValueError(f"{kind.value} needs an angle")
        return gate_matrices(kind, np.array([angle]))[0]
    if angle is not None:
        raise ValueError(f"{kind.value} takes no angle")
    return _FIXED[kind].copy()


# ---------------------------------------------------------------------------
# simulation


def zero_state(num_qubits: int, batch: int | None = None) -> np.ndarray:
    shape = (1 << num_qubits,) if batch is None else (batch, 1 << num_qubits)
    psi = np.zeros(shape, dtype=complex)
    psi[..., 0] = 1.0
    return psi


def apply_matrix(states: np.ndarray, matrix: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Apply a k-qubit matrix to a batch of states.

    ``states`` has shape (B, 2**Q); ``matrix`` is (d, d) shared by the batch or
    (B, d, d) per state. ``qubits`` lists the acted-on qubits, most-significant
    local bit first (control before target).
    """
    k = len(qubits)
    b = states.shape[0]
    psi = states.reshape((b,) + (2,) * num_qubits)
    axes = [num_qubits - q for q in qubits]  # batch axis is 0
    tail = list(range(num_qubits + 1 - k, num_qubits + 1))
    psi = np.moveaxis(psi, axes, tail)
    shape = psi.shape
    psi = psi.reshape(b, -1, 1 << k)
    if matrix.ndim == 2:
        out = psi @ matrix.T
    else:
        out = np.einsum("bij,brj->bri", matrix, psi)
    out = np.moveaxis(out.reshape(shape), tail, axes)
    return out.reshape(b, -1)


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    dim = state.shape[-1]
    nq = dim.bit_length() - 1
    if max(gate.qubits) >= nq:
        raise IndexError(f"gate {gate} out of range for {nq} qubits")
    out = apply_matrix(state.reshape(1, dim), gate_unitary(gate.kind, gate.angle), gate.qubits, nq)
    return out.reshape(dim)


def run_statevector(circuit: Circuit) -> np.ndarray:
    if circuit.num_qubits > MAX_QUBITS:
        raise ValueError(f"{circuit.num_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")
    psi = zero_state(circuit.num_qubits)
    for g in circuit.gates:
        psi = apply_gate(psi, g)
    return psi


# ---------------------------------------------------------------------------
# dense operators (test oracles and equivalence checks)


def embed_operator(matrix: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Full 2**Q x 2**Q operator of a local gate, built entry by entry."""
    k = len(qubits)
    dim = 1 << num_qubits
    full = np.zeros((dim, dim), dtype=complex)
    mask = 0
    for q in qubits:
        mask |= 1 << q
    for col in range(dim):
        local_in = 0
        for q in qubits:
            local_in = (local_in << 1) | ((col >> q) & 1)
        rest = col & ~mask
        for local_out in range(1 << k):
            row = rest
            for pos, q in enumerate(qubits):
                bit = (local_out >> (k - 1 - pos)) & 1
                row |= bit << q
            full[row, col] = matrix[local_out, local_in]
    return full


def dense_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(1 << circuit.num_qubits, dtype=complex)
    for g in circuit.gates:
        u = embed_operator(gate_unitary(g.kind, g.angle), g.qubits, circuit.num_qubits) @ u
    return u


def unitary_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U^dag V)| / dim; equals 1 iff U and V agree up to global phase."""
    return float(abs(np.trace(u.conj().T @ v)) / u.shape[0])


def permutation_operator(layout: Iterable[int], num_qubits: int) -> np.ndarray:
    """Operator moving the state of logical qubit i onto physical qubit layout[i]."""
    layout = list(layout)
    dim = 1 << num_qubits
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        out = 0
        for logical, physical in enumerate(layout):
            out |= ((idx >> logical) & 1) << physical
        perm[out, idx] = 1.0
    return perm
