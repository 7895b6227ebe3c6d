"""Kochen-Specker ray sets and an exhaustive {0,1}-colouring search.

A colouring assigns 0 or 1 to every ray so that no orthogonal pair is
coloured (1, 1) and every orthogonal triple holds exactly one 1.  A set with
no such colouring is a Kochen-Specker set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .constants import TOL
from .errors import NoOrthogonalPair, UnknownSet, WireFormatError
from .linalg import Ray3, as_ray


@dataclass(frozen=True)
class RaySet:
    name: str
    rays: tuple

    def __init__(self, name: str, rays: Iterable):
        unique: list[Ray3] = []
        for r in rays:
            r = as_ray(r)
            if r not in unique:
                unique.append(r)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "rays", tuple(unique))

    def __len__(self) -> int:
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def union(self, other: "RaySet", name: Optional[str] = None) -> "RaySet":
        return RaySet(name or f"{self.name}+{other.name}", self.rays + other.rays)


@dataclass(frozen=True)
class OrthoStructure:
    pairs: tuple
    triples: tuple
    neighbours: tuple = field(repr=False, default=())


def ortho_structure(rayset: RaySet, tol: float = TOL.orthogonal) -> OrthoStructure:
    """Enumerate all orthogonal pairs ``(i, j)`` and triples ``(i, j, k)``, i < j < k."""
    n = len(rayset)
    if n == 0:
        return OrthoStructure((), (), ())
    m = np.array([r.components for r in rayset.rays])
    ortho = np.abs(m @ m.T) < tol
    np.fill_diagonal(ortho, False)
    pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n) if ortho[i, j])
    triples = tuple(
        (i, j, k)
        for i, j in pairs
        for k in range(j + 1, n)
        if ortho[i, k] and ortho[j, k]
    )
    neighbours = tuple(tuple(int(j) for j in np.flatnonzero(ortho[i])) for i in range(n))
    return OrthoStructure(pairs, triples, neighbours)


# ---------------------------------------------------------------------------
# colouring search


@dataclass(frozen=True)
class Colourable:
    assignment: dict
    nodes_explored: int

    colourable = True


@dataclass(frozen=True)
class Uncolourable:
    nodes_explored: int

    colourable = False


ColouringResult = Union[Colourable, Uncolourable]


def check_colouring(structure: OrthoStructure, assignment: dict) -> list[str]:
    """List every violated constraint (empty when the colouring is valid)."""
    problems = []
    for i, j in structure.pairs:
        if assignment.get(i) == 1 and assignment.get(j) == 1:
            problems.append(f"pair {(i, j)} has two 1s")
    for t in structure.triples:
        ones = sum(assignment.get(i, 0) for i in t)
        if ones != 1:
            problems.append(f"triple {t} has {ones} 1s")
    return problems


class _Search:
    def __init__(self, n: int, structure: OrthoStructure):
        self.n = n
        self.neighbours = structure.neighbours or tuple(() for _ in range(n))
        self.triples = structure.triples
        self.triples_of = [[] for _ in range(n)]
        for t in self.triples:
            for i in t:
                self.triples_of[i].append(t)
        # branch on the most constrained rays first
        self.order = sorted(range(n), key=lambda i: (-len(self.triples_of[i]), -len(self.neighbours[i]), i))
        self.nodes = 0

    def propagate(self, colour: list, i: int, value: int) -> Optional[list]:
        """Assign and propagate; return the changed indices, or None on conflict."""
        changed = []
        queue = [(i, value)]
        while queue:
            k, v = queue.pop()
            if colour[k] is not None:
                if colour[k] != v:
                    for c in changed:
                        colour[c] = None
                    return None
                continue
            colour[k] = v
            changed.append(k)
            if v == 1:
                queue.extend((j, 0) for j in self.neighbours[k])
            for t in self.triples_of[k]:
                vals = [colour[x] for x in t]
                ones = vals.count(1)
                unknown = [x for x, c in zip(t, vals) if c is None]
                if ones > 1 or (ones == 0 and not unknown):
                    for c in changed:
                        colour[c] = None
                    return None
                if ones == 0 and len(unknown) == 1:
                    queue.append((unknown[0], 1))
                elif ones == 1:
                    queue.extend((x, 0) for x in unknown)
        return changed

    def solve(self, colour: list) -> bool:
        self.nodes += 1
        nxt = next((i for i in self.order if colour[i] is None), None)
        if nxt is None:
            return True
        for value in (1, 0):
            changed = self.propagate(colour, nxt, value)
            if changed is None:
                continue
            if self.solve(colour):
                return True
            for c in changed:
                colour[c] = None
        return False


def colouring_search(rayset: RaySet, structure: Optional[OrthoStructure] = None) -> ColouringResult:
    """Exhaustive backtracking with unit propagation over {0,1} colourings.

    Returns :class:`Uncolourable` only after every branch has been refuted.
    """
    structure = structure or ortho_structure(rayset)
    n = len(rayset)
    search = _Search(n, structure)
    colour: list = [None] * n
    if search.solve(colour):
        return Colourable({i: int(c) for i, c in enumerate(colour)}, search.nodes)
    return Uncolourable(search.nodes)


# ---------------------------------------------------------------------------
# built-in sets and file format


def peres33() -> RaySet:
    """Peres' 33 rays: all sign/permutation variants of (0,0,1), (0,1,1),
    (0,1,sqrt2) and (1,1,sqrt2), taken up to overall sign."""
    s = np.sqrt(2.0)
    seeds = [(0, 0, 1), (0, 1, 1), (0, 1, s), (1, 1, s)]
    rays = []
    for seed in seeds:
        for perm in itertools.permutations(seed):
            for signs in itertools.product((1, -1), repeat=3):
                v = np.array(perm, dtype=float) * signs
                if np.any(v):
                    rays.append(Ray3(v))
    return RaySet("peres33", rays)


def axes3() -> RaySet:
    return RaySet("axes3", np.eye(3))


_BUILTINS = {"peres33": peres33, "axes3": axes3}


def builtin_rayset(name: str) -> RaySet:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise UnknownSet(name) from None


def dumps_rayset(rayset: RaySet) -> str:
    lines = [f"name: {rayset.name}"]
    lines += ["{!r} {!r} {!r}".format(*r.components) for r in rayset.rays]
    return "\n".join(lines) + "\n"


def loads_rayset(text: str) -> RaySet:
    """Parse the ray-file format: ``name: <name>`` header, then one ray per
    line as three decimals; ``#`` starts a comment."""
    name = None
    rays = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if name is None:
            if not line.startswith("name:"):
                raise WireFormatError(f"line {lineno}: expected 'name:' header")
            name = line[len("name:") :].strip()
            continue
        parts = line.split()
        if len(parts) != 3:
            raise WireFormatError(f"line {lineno}: expected three components, got {len(parts)}")
        rays.append(Ray3([float(p) for p in parts]))
    if name is None:
        raise WireFormatError("missing 'name:' header")
    return RaySet(name, rays)


def load_rayset(spec: Union[str, Path]) -> RaySet:
    """Resolve a built-in name or read a ray file from disk."""
    if str(spec) in _BUILTINS:
        return builtin_rayset(str(spec))
    return loads_rayset(Path(spec).read_text())


def pick_orthogonal_pair(rayset: RaySet, rng: np.random.Generator, structure: Optional[OrthoStructure] = None):
    """Draw one orthogonal pair uniformly; order within the pair is as stored."""
    structure = structure or ortho_structure(rayset)
    if not structure.pairs:
        raise NoOrthogonalPair(f"ray set {rayset.name!r} has no orthogonal pair")
    i, j = structure.pairs[int(rng.integers(len(structure.pairs)))]
    return rayset.rays[i], rayset.rays[j]
