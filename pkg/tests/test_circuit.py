import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgk.circuit import (Circuit, Gate, GateKind, IDENTITY, MAX_QUBITS, PAULI_X, PAULI_Y, apply_gate, apply_matrix,
                         dense_unitary, embed_operator, gate_unitary, permutation_operator, run_statevector,
                         unitary_fidelity, zero_state)

TWO_Q = [k for k in GateKind if k.num_qubits == 2]
ONE_Q = [k for k in GateKind if k.num_qubits == 1]


def _gate(kind, qubits, angle=0.7):
    return Gate(kind, tuple(qubits), angle if kind.parametric else None)


def test_fixed_gate_identities():
    x, sx, ecr = gate_unitary("X"), gate_unitary("SX"), gate_unitary("ECR")
    np.testing.assert_allclose(x @ x, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(sx @ sx, x, atol=1e-12)
    np.testing.assert_allclose(ecr, ecr.conj().T, atol=1e-12)
    np.testing.assert_allclose(ecr @ ecr, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(ecr, (np.kron(PAULI_X, IDENTITY) - np.kron(PAULI_Y, PAULI_X)) / np.sqrt(2))


@pytest.mark.parametrize("kind", list(GateKind))
def test_all_gates_unitary(kind):
    u = gate_unitary(kind, 1.234 if kind.parametric else None)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(GateKind.RZ, (0,))
    with pytest.raises(ValueError):
        Gate(GateKind.X, (0,), 1.0)
    with pytest.raises(ValueError):
        Gate(GateKind.CX, (1, 1))
    with pytest.raises(ValueError):
        Circuit(2, [Gate(GateKind.X, (2,))])
    with pytest.raises(ValueError):
        GateKind.parse("FOO")
    assert GateKind.parse("id") is GateKind.I


def test_textbook_states():
    psi = apply_gate(zero_state(1), Gate(GateKind.X, (0,)))
    np.testing.assert_allclose(psi, [0, 1])
    psi = apply_gate(zero_state(1), Gate(GateKind.H, (0,)))
    np.testing.assert_allclose(psi, [2**-0.5, 2**-0.5])
    # control (qubit 1) is |0>, target (qubit 0) untouched
    psi = apply_gate(zero_state(2), Gate(GateKind.CX, (1, 0)))
    np.testing.assert_allclose(psi, [1, 0, 0, 0])
    bell = run_statevector(Circuit(2, [Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1))]))
    np.testing.assert_allclose(bell, [2**-0.5, 0, 0, 2**-0.5], atol=1e-12)


def test_empty_circuit_and_cap():
    np.testing.assert_array_equal(run_statevector(Circuit(3)), zero_state(3))
    with pytest.raises(ValueError):
        run_statevector(Circuit(MAX_QUBITS + 1))
    assert MAX_QUBITS >= 14


def test_out_of_range_qubit():
    with pytest.raises(IndexError):
        apply_gate(zero_state(2), Gate(GateKind.X, (3,)))


def test_gate_order_respected():
    hx = run_statevector(Circuit(1, [Gate(GateKind.H, (0,)), Gate(GateKind.X, (0,))]))
    xh = run_statevector(Circuit(1, [Gate(GateKind.X, (0,)), Gate(GateKind.H, (0,))]))
    np.testing.assert_allclose(hx, [2**-0.5, 2**-0.5])
    np.testing.assert_allclose(xh, [2**-0.5, -(2**-0.5)])


@pytest.mark.parametrize("kind", TWO_Q)
@pytest.mark.parametrize("qubits", [(0, 1), (1, 0)])
def test_two_qubit_kernel_matches_explicit_kron(kind, qubits):
    # explicit 4x4 embedding on Q=2: qubit 0 is the low bit, so (c=1, t=0) is plain kron order
    u = gate_unitary(kind, 0.9 if kind.parametric else None)
    swap = np.eye(4)[[0, 2, 1, 3]]
    full = u if qubits == (1, 0) else swap @ u @ swap
    rng = np.random.default_rng(0)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    out = apply_gate(psi, Gate(kind, qubits, 0.9 if kind.parametric else None))
    assert np.abs(out - full @ psi).max() < 1e-12


def test_embed_operator_matches_kron():
    u = gate_unitary("RY", 0.3)
    np.testing.assert_allclose(embed_operator(u, [1], 3), np.kron(np.eye(2), np.kron(u, np.eye(2))))


def test_batched_apply_matches_single():
    rng = np.random.default_rng(1)
    states = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
    mats = np.stack([gate_unitary("CRY", a) for a in rng.uniform(0, 6, 5)])
    out = apply_matrix(states, mats, (2, 0), 3)
    for b in range(5):
        np.testing.assert_allclose(out[b], embed_operator(mats[b], (2, 0), 3) @ states[b], atol=1e-12)


def random_circuits(max_q=4, max_gates=20):
    @st.composite
    def build(draw):
        nq = draw(st.integers(2, max_q))
        gates = []
        for _ in range(draw(st.integers(0, max_gates))):
            kind = draw(st.sampled_from(list(GateKind)))
            qubits = draw(st.permutations(range(nq)))[: kind.num_qubits]
            angle = draw(st.floats(-7, 7)) if kind.parametric else None
            gates.append(Gate(kind, tuple(qubits), angle))
        return Circuit(nq, gates)
    return build()


@given(random_circuits())
def test_norm_preserved_and_matches_dense(circuit):
    psi = run_statevector(circuit)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10
    np.testing.assert_allclose(psi, dense_unitary(circuit)[:, 0], atol=1e-10)


def test_unitary_fidelity_ignores_global_phase():
    u = dense_unitary(Circuit(2, [Gate(GateKind.H, (0,)), Gate(GateKind.ECR, (0, 1))]))
    assert unitary_fidelity(u, np.exp(0.4j) * u) == pytest.approx(1.0)
    assert unitary_fidelity(u, np.eye(4)) < 0.99


def test_permutation_operator_moves_qubits():
    # logical 0 -> physical 2: X on logical 0 becomes X on physical 2
    p = permutation_operator([2, 0, 1], 3)
    x0 = embed_operator(gate_unitary("X"), [0], 3)
    x2 = embed_operator(gate_unitary("X"), [2], 3)
    np.testing.assert_allclose(p @ x0 @ p.T, x2)
