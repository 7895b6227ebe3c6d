"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle rebuilds its quantity from
first principles so an error in the library cannot hide in both places.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

W = np.exp(2j * np.pi / 3)


def vn_entropy3(matrix: np.ndarray) -> float:
    """``-sum a log3 a`` over the eigenvalues, without renormalizing."""
    eig = np.linalg.eigvalsh(matrix)
    eig = eig[eig > 1e-15]
    return float(-np.sum(eig * np.log(eig)) / np.log(3))


def f_state(lam, x: int, y: int) -> np.ndarray:
    g = (y - x) % 3
    v = np.zeros(9, dtype=complex)
    for j in range(3):
        v[3 * g + j] = W ** (j * x) * math.sqrt(lam[3 * g + j] / 3)
    return v


def cq_matrices(lam):
    """Explicit classical-quantum operators built from the purification states.

    Returns ``(sigma_XE, sigma_E, sigma_XY, sigma_Y)`` as dense matrices.
    """
    x_proj = [np.outer(np.eye(3)[x], np.eye(3)[x]) for x in range(3)]
    xye = np.zeros((81, 81), dtype=complex)
    for x, y in itertools.product(range(3), repeat=2):
        f = f_state(lam, x, y)
        xye += np.kron(np.kron(x_proj[x], x_proj[y]), np.outer(f, f.conj()))
    t = xye.reshape(3, 3, 9, 3, 3, 9)
    sigma_xe = np.einsum("aybcyd->abcd", t).reshape(27, 27)
    sigma_e = np.einsum("xyaxyb->ab", t)
    q = [sum(lam[3 * g + k] ** 2 for k in range(3)) for g in range(3)]
    sigma_xy = np.diag([q[(y - x) % 3] / 3 for x in range(3) for y in range(3)])
    sigma_y = np.eye(3) / 3
    return sigma_xe, sigma_e, sigma_xy, sigma_y


def h2(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log(p) + (1 - p) * math.log(1 - p)) / math.log(2)


def toeplitz_hash(key, seed, m: int):
    """Row-by-row GF(2) product with an explicitly listed Toeplitz matrix."""
    n = len(key)
    out = []
    for i in range(m):
        row = [seed[i - j + n - 1] for j in range(n)]
        out.append(sum(r * k for r, k in zip(row, key)) % 2)
    return out


def peres_rays():
    """Peres rays by brute force: every vector with entries in {0, +-1, +-sqrt2}
    whose squared norm is 1, 2, 3 or 4 and whose pattern is a permutation of
    a Peres seed, deduplicated up to sign."""
    s = math.sqrt(2)
    vals = (0.0, 1.0, -1.0, s, -s)
    seeds = {(0, 0, 1), (0, 1, 1), (0, 1, 2), (1, 1, 2)}  # squared magnitudes
    out = []
    for v in itertools.product(vals, repeat=3):
        pattern = tuple(sorted(round(c * c) for c in v))
        if pattern not in seeds:
            continue
        u = np.array(v) / np.linalg.norm(v)
        if not any(abs(abs(np.dot(u, w)) - 1) < 1e-9 for w in out):
            out.append(u)
    return out


def is_colourable_bruteforce(rays) -> bool:
    n = len(rays)
    pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if abs(np.dot(rays[i], rays[j])) < 1e-10]
    pset = set(pairs)
    triples = [
        (i, j, k)
        for i, j, k in itertools.combinations(range(n), 3)
        if (i, j) in pset and (i, k) in pset and (j, k) in pset
    ]
    for bits in itertools.product((0, 1), repeat=n):
        if any(bits[i] and bits[j] for i, j in pairs):
            continue
        if all(bits[i] + bits[j] + bits[k] == 1 for i, j, k in triples):
            return True
    return False
