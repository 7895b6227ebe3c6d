"""Dense linear algebra over qutrit (3) and two-qutrit (9) spaces.

Kets and density operators are plain numpy arrays (shape ``(3,)``, ``(9,)``
and ``(9, 9)``); two-qutrit amplitudes are indexed ``3*a + b``.  Real
measurement directions are wrapped in :class:`Ray3`, which is sign-canonical
so that ``v`` and ``-v`` compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .constants import TOL
from .errors import InvalidState, NotOrthogonal, RangeError, ZeroVector

ArrayLike = Union[Sequence[float], np.ndarray]

PROBABILITY_FLOOR = 1e-15


def normalize(v: ArrayLike) -> np.ndarray:
    """Return ``v / |v|``; raises :class:`ZeroVector` for (near) null input."""
    arr = np.asarray(v)
    if not np.issubdtype(arr.dtype, np.complexfloating):
        arr = arr.astype(float)
    norm = np.linalg.norm(arr)
    if norm < TOL.zero_norm:
        raise ZeroVector(f"cannot normalize vector of norm {norm:.3g}")
    return arr / norm


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    for c in v:
        if abs(c) > TOL.sign:
            return -v if c < 0 else v
    return v


@dataclass(frozen=True, eq=False)
class Ray3:
    """A unit direction in R^3, identified with its negative.

    The stored components are normalized and carry a positive first nonzero
    entry.
    """

    components: tuple

    def __init__(self, x: Union[ArrayLike, float], y: float = None, z: float = None):
        raw = (x, y, z) if y is not None else tuple(x)
        if len(raw) != 3:
            raise ValueError("a ray needs exactly three components")
        v = _canonical_sign(normalize(np.asarray(raw, dtype=float)))
        # avoid -0.0 so text output and hashing are stable
        v = np.where(v == 0.0, 0.0, v)
        object.__setattr__(self, "components", tuple(float(c) for c in v))
        object.__setattr__(self, "_hash", hash(tuple(round(c, 9) + 0.0 for c in self.components)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.components)

    def dot(self, other: "Ray3") -> float:
        return float(np.dot(self.components, other.components))

    def is_orthogonal(self, other: "Ray3", tol: float = TOL.orthogonal) -> bool:
        return abs(self.dot(other)) < tol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ray3):
            return NotImplemented
        return all(abs(a - b) <= TOL.unit_norm for a, b in zip(self.components, other.components))

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self):
        return iter(self.components)

    def __repr__(self) -> str:
        return "Ray3({:.6g}, {:.6g}, {:.6g})".format(*self.components)


def as_ray(v: Union[Ray3, ArrayLike]) -> Ray3:
    return v if isinstance(v, Ray3) else Ray3(v)


@dataclass(frozen=True)
class Basis3:
    """An ordered orthonormal triple of rays."""

    rays: tuple

    def __post_init__(self):
        if len(self.rays) != 3:
            raise ValueError("a basis holds exactly three rays")
        object.__setattr__(self, "rays", tuple(as_ray(r) for r in self.rays))
        for i in range(3):
            for j in range(i + 1, 3):
                if not self.rays[i].is_orthogonal(self.rays[j]):
                    raise NotOrthogonal(f"rays {i} and {j} are not orthogonal")

    @property
    def matrix(self) -> np.ndarray:
        """Rows are the basis vectors."""
        return np.array([r.components for r in self.rays])

    def index(self, ray: Ray3) -> int:
        """Position of ``ray`` (sign-insensitive); ``ValueError`` if absent."""
        for i, r in enumerate(self.rays):
            if r == ray:
                return i
        raise ValueError(f"{ray!r} is not in this basis")

    def __getitem__(self, i: int) -> Ray3:
        return self.rays[i]

    def __iter__(self):
        return iter(self.rays)

    def __len__(self) -> int:
        return 3


def complete_basis(partial: Iterable[Union[Ray3, ArrayLike]]) -> Basis3:
    """Extend one or two orthogonal rays to an orthonormal basis.

    Two rays are completed by their cross product.  A single ray is completed
    by Gram-Schmidt against e0, e1, e2 in that order, skipping any axis whose
    residual norm falls below the tolerance.  Completion rays are
    sign-canonical, so the result is a pure function of the input.
    """
    rays = [as_ray(r) for r in partial]
    if not 1 <= len(rays) <= 2:
        raise ValueError("complete_basis takes one or two rays")
    if len(rays) == 2:
        a, b = rays
        if not a.is_orthogonal(b):
            raise NotOrthogonal(f"{a!r} and {b!r} are not orthogonal (dot={a.dot(b):.3g})")
        return Basis3((a, b, Ray3(np.cross(a.vector, b.vector))))

    found = [rays[0].vector]
    for axis in np.eye(3):
        residual = axis - sum(np.dot(axis, f) * f for f in found)
        if np.linalg.norm(residual) < TOL.gram_schmidt_residual:
            continue
        # second pass: a small residual carries cancellation error
        residual = residual - sum(np.dot(residual, f) * f for f in found)
        found.append(normalize(residual))
        if len(found) == 3:
            break
    return Basis3((rays[0], Ray3(found[1]), Ray3(found[2])))


def ket3(index: int) -> np.ndarray:
    """Computational basis state ``|index>`` of one qutrit."""
    k = np.zeros(3, dtype=complex)
    k[index] = 1.0
    return k


def ket9(a: int, b: int) -> np.ndarray:
    """Computational basis state ``|ab>`` of two qutrits."""
    return tensor(ket3(a), ket3(b))


def tensor(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Kronecker product; amplitude ``3*x + y`` is ``a[x] * b[y]``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def density(ket: ArrayLike) -> np.ndarray:
    """Projector ``|psi><psi|`` of a normalized ket."""
    psi = normalize(np.asarray(ket, dtype=complex))
    return np.outer(psi, psi.conj())


def maximally_mixed(dim: int = 9) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def check_density(rho: ArrayLike) -> np.ndarray:
    """Validate a density operator and return it as a complex array.

    Raises :class:`InvalidState` on a non-square shape, non-Hermitian matrix,
    trace away from 1 or a negative eigenvalue.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density operator must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > TOL.hermitian:
        raise InvalidState("density operator is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TOL.trace:
        raise InvalidState(f"trace is {tr.real:.15g}, expected 1")
    if np.min(np.linalg.eigvalsh(rho)) < TOL.eigenvalue_floor:
        raise InvalidState("density operator has a negative eigenvalue")
    return rho


def joint_distribution(state: ArrayLike, basis_a: Basis3, basis_b: Basis3) -> np.ndarray:
    """Outcome table ``P[i, j] = <a_i b_j| rho |a_i b_j>`` for local measurements."""
    rho = check_density(state)
    if rho.shape != (9, 9):
        raise InvalidState("joint_distribution expects a two-qutrit (9x9) state")
    # row 3*i + j of ``products`` is a_i (x) b_j
    products = np.einsum("ix,jy->ijxy", basis_a.matrix, basis_b.matrix).reshape(9, 9).astype(complex)
    probs = np.einsum("kx,xy,ky->k", products.conj(), rho, products).real
    # rounding residue on orthogonal products is not a physical probability
    probs[probs < PROBABILITY_FLOOR] = 0.0
    return probs.reshape(3, 3)


def depolarize(state: ArrayLike, p: float) -> np.ndarray:
    """Depolarizing channel ``(1-p) rho + p I/9``."""
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"depolarizing parameter must lie in [0, 1], got {p}")
    rho = check_density(state)
    if p == 0.0:
        return rho
    dim = rho.shape[0]
    return (1.0 - p) * rho + p * np.eye(dim, dtype=complex) / dim


def fidelity_pure(a: ArrayLike, b: ArrayLike) -> float:
    """``|<a|b>|^2`` for normalized kets; insensitive to global phase."""
    return float(abs(np.vdot(a, b)) ** 2)
