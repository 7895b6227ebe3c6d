"""Single-qutrit gates, controlled gates and the Bell-state preparation circuit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import TOL
from .errors import RangeError, UnknownLabel
from .linalg import ket9

OMEGA = np.exp(2j * np.pi / 3)

_PERMUTATIONS = {
    "I": (0, 1, 2),
    "X01": (1, 0, 2),
    "X12": (0, 2, 1),
    "X02": (2, 1, 0),
    "Xplus1": (1, 2, 0),
    "Xplus2": (2, 0, 1),
}
LABELS = tuple(_PERMUTATIONS) + ("H3",)


def _permutation_matrix(images) -> np.ndarray:
    # column p holds |images[p]>
    m = np.zeros((3, 3), dtype=complex)
    for p, q in enumerate(images):
        m[q, p] = 1.0
    return m


def _hadamard() -> np.ndarray:
    j, k = np.meshgrid(range(3), range(3), indexing="ij")
    return OMEGA ** (j * k) / np.sqrt(3)


@dataclass(frozen=True)
class Gate3:
    label: str
    matrix: np.ndarray

    def __call__(self, ket: np.ndarray) -> np.ndarray:
        return self.matrix @ ket

    def is_unitary(self, tol: float = TOL.unitary) -> bool:
        return is_unitary(self.matrix, tol)


def gate(label: str) -> Gate3:
    """Look up a gate by label.

    ``X01``, ``X12``, ``X02`` swap two levels; ``Xplus1``/``Xplus2`` add 1 or 2
    mod 3; ``H3`` is the qutrit Fourier matrix with its 1/sqrt(3) factor.
    """
    if label == "H3":
        return Gate3("H3", _hadamard())
    try:
        images = _PERMUTATIONS[label]
    except KeyError:
        raise UnknownLabel(label) from None
    return Gate3(label, _permutation_matrix(images))


def is_unitary(m: np.ndarray, tol: float = TOL.unitary) -> bool:
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= tol)


@dataclass(frozen=True)
class ControlledGate9:
    """Applies ``target_gate`` to qutrit 1 when qutrit 0 is ``|control_value>``."""

    control_value: int
    target_gate: Gate3

    def __post_init__(self):
        if self.control_value not in (0, 1, 2):
            raise RangeError(f"control value must be 0, 1 or 2, got {self.control_value}")

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(9, dtype=complex)
        c = self.control_value
        m[3 * c : 3 * c + 3, 3 * c : 3 * c + 3] = self.target_gate.matrix
        return m


def apply_controlled(cg: ControlledGate9, state: np.ndarray) -> np.ndarray:
    out = np.array(state, dtype=complex)
    c = cg.control_value
    out[3 * c : 3 * c + 3] = cg.target_gate.matrix @ out[3 * c : 3 * c + 3]
    return out


def on_first(g: Gate3, state: np.ndarray) -> np.ndarray:
    return np.kron(g.matrix, np.eye(3)) @ state


def on_second(g: Gate3, state: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(3), g.matrix) @ state


_U_BY_BLOCK = ("I", "Xplus1", "Xplus2")


def circuit_settings(j: int) -> tuple[int, str]:
    """Map Bell index ``j = 3u + x`` to (first-qutrit input ``x``, label of ``U``)."""
    if not 0 <= j <= 8:
        raise RangeError(f"Bell index must be in 0..8, got {j}")
    u, x = divmod(j, 3)
    return x, _U_BY_BLOCK[u]


def run_circuit(x: int, u_label: str) -> np.ndarray:
    """H3 on q0, U on q1, then C1-Xplus1 and C2-Xplus2, starting from ``|x0>``."""
    state = ket9(x, 0)
    state = on_first(gate("H3"), state)
    state = on_second(gate(u_label), state)
    state = apply_controlled(ControlledGate9(1, gate("Xplus1")), state)
    state = apply_controlled(ControlledGate9(2, gate("Xplus2")), state)
    return state


def prepare_bell(j: int) -> np.ndarray:
    x, u_label = circuit_settings(j)
    return run_circuit(x, u_label)


def bell_state(j: int) -> np.ndarray:
    """Analytic ``|phi_j>`` = sum_k w^(xk) |k, k+u> / sqrt(3) with ``j = 3u + x``."""
    if not 0 <= j <= 8:
        raise RangeError(f"Bell index must be in 0..8, got {j}")
    u, x = divmod(j, 3)
    psi = np.zeros(9, dtype=complex)
    for k in range(3):
        psi[3 * k + (k + u) % 3] = OMEGA ** (x * k)
    return psi / np.sqrt(3)


def bell_basis() -> list[np.ndarray]:
    return [bell_state(j) for j in range(9)]


def bell_matrix() -> np.ndarray:
    """9x9 matrix whose column ``j`` is ``|phi_j>``."""
    return np.column_stack(bell_basis())
