"""Closed-form security quantities for Bell-diagonal two-qutrit states.

Entropies are in trits (log base 3) unless a function says otherwise.  The
nine eigenvalues of a Bell-diagonal state fall into three groups
``(l0,l1,l2), (l3,l4,l5), (l6,l7,l8)``; ``S_g`` is a group's sum and ``Q_g``
the sum of its squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import TOL
from .errors import InvalidSpectrum, InvalidState, RangeError
from .gates import OMEGA, bell_matrix
from .linalg import Basis3, check_density


def xlogy(x: float, y: float, base: float = 3.0) -> float:
    """``x * log_base(y)`` with the convention ``0 * log 0 = 0``."""
    if x == 0.0:
        return 0.0
    return x * math.log(y) / math.log(base)


def xlogx(x: float, base: float = 3.0) -> float:
    return xlogy(x, x, base)


@dataclass(frozen=True)
class Spectrum9:
    lam: tuple

    def __init__(self, lam: Sequence[float]):
        values = tuple(float(v) for v in lam)
        if len(values) != 9:
            raise InvalidSpectrum(f"need nine eigenvalues, got {len(values)}")
        if any(v < TOL.spectrum_floor for v in values):
            raise InvalidSpectrum(f"negative eigenvalue in {values}")
        if abs(sum(values) - 1.0) > TOL.spectrum_sum:
            raise InvalidSpectrum(f"eigenvalues sum to {sum(values):.15g}, expected 1")
        object.__setattr__(self, "lam", tuple(max(v, 0.0) for v in values))

    def __iter__(self):
        return iter(self.lam)

    def __getitem__(self, i):
        return self.lam[i]


@dataclass(frozen=True)
class GroupSums:
    S: tuple
    Q: tuple


def group_sums(spec: Spectrum9) -> GroupSums:
    lam = spec.lam
    S = tuple(sum(lam[3 * g : 3 * g + 3]) for g in range(3))
    Q = tuple(sum(v * v for v in lam[3 * g : 3 * g + 3]) for g in range(3))
    return GroupSums(S, Q)


@dataclass(frozen=True)
class EntropyReport:
    h_XE: float
    h_E: float
    h_XY: float
    h_Y: float
    rate_lb: float
    trace_XY: float

    def lines(self) -> list[str]:
        out = [
            f"H(XE) = {self.h_XE:.12g}",
            f"H(E)  = {self.h_E:.12g}",
            f"H(XY) = {self.h_XY:.12g}",
            f"H(Y)  = {self.h_Y:.12g}",
            f"rate lower bound = {self.rate_lb:.12g}",
            f"trace of XY operator = {self.trace_XY:.12g}",
        ]
        if abs(self.trace_XY - 1.0) > 1e-12:
            out.append("note: XY operator is not unit-trace (sum of squared eigenvalues != 1)")
        return out


def entropies(spec: Spectrum9) -> EntropyReport:
    """Entropies of the measured Bell-diagonal state and Eve's purification.

    ``h_XY`` keeps the un-simplified form ``sum(l^2) - sum Q log Q`` because the
    XY operator has trace ``sum(l^2)``; the trace is reported alongside.
    """
    g = group_sums(spec)
    trace_xy = sum(v * v for v in spec.lam)
    h_xe = 1.0 - sum(xlogx(s) for s in g.S)
    h_e = 0.0 - sum(xlogx(v) for v in spec.lam)
    h_xy = trace_xy - sum(xlogx(q) for q in g.Q)
    return EntropyReport(h_xe, h_e, h_xy, 1.0, rate_lower_bound(spec), trace_xy)


def rate_lower_bound(spec: Spectrum9) -> float:
    """``1 + sum l log l - sum S log S + sum Q log Q`` in trits."""
    g = group_sums(spec)
    return (
        1.0
        + sum(xlogx(v) for v in spec.lam)
        - sum(xlogx(s) for s in g.S)
        + sum(xlogx(q) for q in g.Q)
    )


def spectrum_from_noise(eta: float, r: float) -> Spectrum9:
    """The one-parameter family ``diag(1 - r eta, r eta / 8, ... )``."""
    x = r * eta
    if not 0.0 <= x <= 1.0:
        raise RangeError(f"r*eta must lie in [0, 1], got {x}")
    return Spectrum9((1.0 - x,) + (x / 8.0,) * 8)


def mutual_information(spec: Spectrum9) -> float:
    """``2 + sum_g (log3 Q_g - 1) Q_g``, taken verbatim.

    This exceeds 1 whenever ``sum(l^2) < 1``; use :func:`above_qutrit_bound`
    to flag such values.
    """
    g = group_sums(spec)
    return 2.0 + sum(xlogx(q) - q for q in g.Q)


def mutual_information_printed(eta: float, r: float) -> float:
    """The closed form for the ``diag(1 - r eta, r eta/8, ...)`` family as printed.

    Defined for ``r * eta <= 1``; negative ``r`` is accepted so the whole
    published family of curves can be evaluated.
    """
    x = r * eta
    if x > 1.0:
        raise RangeError(f"r*eta must not exceed 1, got {x}")
    x2 = x * x
    a2 = (x - 1.0) ** 2
    return (
        3.0 * xlogy(x2, x2 / 64.0)
        - 8.0 * xlogy(x2 + 8.0 * a2, x2 / 24.0 + a2 / 3.0)
        + xlogy(x2 + 32.0 * a2, x2 / 96.0 + a2 / 3.0)
    ) / 32.0


def above_qutrit_bound(value: float, tol: float = 1e-12) -> bool:
    """True when a mutual information exceeds ``log3(3) = 1``."""
    return value > 1.0 + tol


def _key_rate_terms(eta: float, log: Callable[[float], float]) -> float:
    def term(coef: float, arg: float) -> float:
        return 0.0 if coef == 0.0 else coef * log(arg)

    return (
        term(3.0 * eta / 2.0, 3.0 * eta / 16.0)
        - term(9.0 * eta / 8.0, 9.0 * eta / 16.0)
        - term((3.0 * eta - 2.0) / 2.0, 1.0 - 3.0 * eta / 2.0)
        + term((9.0 * eta - 8.0) / 8.0, 1.0 - 9.0 * eta / 8.0)
        + term((9.0 * eta**2 + 32.0 * (3.0 * eta - 2.0) ** 2) / 128.0, 297.0 * eta**2 / 128.0 - 3.0 * eta + 1.0)
        + 1.0
    )


def key_rate(eta: float, log_base: Optional[float] = None) -> float:
    """Key rate of the ``r = 1.5`` family as a function of the error rate.

    Logarithms are natural by default; ``log_base`` evaluates the same
    expression in another base (used to show which base reproduces the
    published zero crossing).
    """
    if not 0.0 <= eta <= 2.0 / 3.0:
        raise RangeError(f"eta must lie in [0, 2/3], got {eta}")
    if log_base is None:
        log = math.log
    else:
        denom = math.log(log_base)
        log = lambda v: math.log(v) / denom  # noqa: E731
    return _key_rate_terms(eta, log)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"probability must lie in [0, 1], got {p}")
    return -xlogx(p, 2.0) - xlogx(1.0 - p, 2.0)


def bb84_rate(eta: float) -> float:
    """``1 - 2 h2(eta)``."""
    if not 0.0 <= eta <= 0.5:
        raise RangeError(f"eta must lie in [0, 1/2], got {eta}")
    return 1.0 - 2.0 * binary_entropy(eta)


def minentropy_bound(n: float, eta: float, c: float = 0.0) -> float:
    """Smooth min-entropy lower bound ``n (1 - h2(eta)) - c sqrt(n)``."""
    if n < 0 or c < 0:
        raise RangeError("n and c must be non-negative")
    return n * (1.0 - binary_entropy(eta)) - c * math.sqrt(n)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float = TOL.root) -> float:
    """Plain bisection; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Bell twirl and the admissible-state condition


def _generalized_paulis() -> list[np.ndarray]:
    shift = np.roll(np.eye(3), 1, axis=0)  # |p> -> |p+1>
    clock = np.diag([1.0, OMEGA, OMEGA**2])
    return [
        np.linalg.matrix_power(shift, k) @ np.linalg.matrix_power(clock, j)
        for k in range(3)
        for j in range(3)
    ]


_TWIRL_OPS = [np.kron(t, t.conj()) for t in _generalized_paulis()]


def bell_twirl(state: np.ndarray) -> np.ndarray:
    """Average over conjugation by ``tau (x) conj(tau)`` for the nine generalized Paulis.

    The output is diagonal in the Bell basis and keeps the Bell-basis diagonal
    of the input.
    """
    rho = check_density(state)
    if rho.shape != (9, 9):
        raise InvalidState("bell_twirl expects a two-qutrit state")
    return sum(u @ rho @ u.conj().T for u in _TWIRL_OPS) / 9.0


def spectrum_of(state: np.ndarray) -> Spectrum9:
    """Bell-basis diagonal ``<phi_i| D(rho) |phi_i>`` of the twirled state."""
    twirled = bell_twirl(state)
    b = bell_matrix()
    diag = np.einsum("xi,xy,yi->i", b.conj(), twirled, b).real
    return Spectrum9(np.clip(diag, 0.0, None) / np.sum(np.clip(diag, 0.0, None)))


def bell_offdiagonal(state: np.ndarray) -> float:
    """Largest off-diagonal magnitude of ``state`` in the Bell basis."""
    b = bell_matrix()
    m = b.conj().T @ np.asarray(state) @ b
    return float(np.max(np.abs(m - np.diag(np.diag(m)))))


def mismatch_elements(state: np.ndarray, basis_a: Basis3, basis_b: Basis3) -> list[float]:
    """``<b b'| rho |b b'>`` over outcomes that fail the game test.

    ``b' = basis_b[0]`` is Bob's kept outcome ``v_l`` and ``b`` runs over
    Alice's basis vectors other than ``v_l``.
    """
    rho = check_density(state)
    v_l = basis_b[0]
    ell = basis_a.index(v_l)
    bb = basis_b[0].vector
    out = []
    for i, a in enumerate(basis_a):
        if i == ell:
            continue
        vec = np.kron(a.vector, bb).astype(complex)
        out.append(float(np.real(vec.conj() @ rho @ vec)))
    return out


def gamma_membership(state: np.ndarray, eta: float, basis_a: Basis3, basis_b: Basis3) -> bool:
    """True iff every mismatch element is at most ``eta / 2``."""
    return all(e <= eta / 2.0 + TOL.gamma_slack for e in mismatch_elements(state, basis_a, basis_b))
