import numpy as np
import pytest

from tdiqkd.errors import UnknownLabel
from tdiqkd.gates import (
    LABELS,
    ControlledGate9,
    apply_controlled,
    bell_basis,
    bell_state,
    circuit_settings,
    gate,
    is_unitary,
    prepare_bell,
    run_circuit,
)
from tdiqkd.linalg import fidelity_pure, ket3, ket9

W = np.exp(2j * np.pi / 3)


def test_single_qutrit_examples():
    assert np.allclose(gate("X01")(ket3(0)), ket3(1))
    assert np.allclose(gate("Xplus2")(ket3(2)), ket3(1))
    assert np.allclose(gate("H3")(ket3(0)), np.ones(3) / np.sqrt(3))
    assert np.allclose(gate("X12")(ket3(1)), ket3(2))
    assert np.allclose(gate("X02")(ket3(2)), ket3(0))
    assert np.allclose(gate("Xplus1")(ket3(2)), ket3(0))
    with pytest.raises(UnknownLabel):
        gate("Y")


@pytest.mark.parametrize("label", LABELS)
def test_gates_unitary(label):
    assert is_unitary(gate(label).matrix)


@pytest.mark.parametrize("c", range(3))
@pytest.mark.parametrize("label", LABELS)
def test_controlled_unitary(c, label):
    assert is_unitary(ControlledGate9(c, gate(label)).matrix)


def test_controlled_examples():
    cx1 = ControlledGate9(1, gate("Xplus1"))
    cx2 = ControlledGate9(2, gate("Xplus2"))
    assert np.allclose(apply_controlled(cx1, ket9(1, 0)), ket9(1, 1))
    assert np.allclose(apply_controlled(cx1, ket9(0, 0)), ket9(0, 0))
    assert np.allclose(apply_controlled(cx2, ket9(2, 0)), ket9(2, 2))


def test_circuit_examples():
    assert fidelity_pure(run_circuit(0, "I"), bell_state(0)) == pytest.approx(1, abs=1e-12)
    assert fidelity_pure(run_circuit(1, "I"), bell_state(1)) == pytest.approx(1, abs=1e-12)
    assert fidelity_pure(run_circuit(2, "Xplus2"), bell_state(8)) == pytest.approx(1, abs=1e-12)


def test_bell_state_display():
    # phi_4 = (|01> + w|12> + w^2|20>)/sqrt3
    ref = (ket9(0, 1) + W * ket9(1, 2) + W**2 * ket9(2, 0)) / np.sqrt(3)
    assert np.allclose(bell_state(4), ref)


def test_bell_basis_orthonormal_and_circuit_agrees():
    basis = np.array(bell_basis())
    assert np.allclose(basis.conj() @ basis.T, np.eye(9), atol=1e-12)
    outs = np.array([prepare_bell(j) for j in range(9)])
    assert np.allclose(outs.conj() @ outs.T, np.eye(9), atol=1e-10)
    for j in range(9):
        x, u = circuit_settings(j)
        assert j == 3 * ["I", "Xplus1", "Xplus2"].index(u) + x
        assert fidelity_pure(prepare_bell(j), bell_state(j)) >= 1 - 1e-12
