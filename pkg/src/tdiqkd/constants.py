"""Numerical tolerances used across the package.

All comparisons go through :data:`TOL` so tests and library code agree.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    zero_norm: float = 1e-14
    unit_norm: float = 1e-12
    sign: float = 1e-12
    orthogonal: float = 1e-10
    gram_schmidt_residual: float = 1e-10
    hermitian: float = 1e-12
    trace: float = 1e-12
    eigenvalue_floor: float = -1e-12
    probability_sum: float = 1e-10
    unitary: float = 1e-12
    spectrum_sum: float = 1e-12
    spectrum_floor: float = -1e-14
    gamma_slack: float = 1e-12
    root: float = 1e-6


TOL = Tolerances()
