"""The two-party Impossible Colouring game played with a shared two-qutrit state.

Alice receives an orthogonal pair ``(v1, v2)`` from the ray set and measures
in ``{v1, v2, v1 x v2}``.  Bob picks ``v_l`` from the pair by a fair coin and
measures in a basis that starts with ``v_l``.  He announces 0 when his
outcome is ``v_l`` (the round is kept) and 1 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import NotOrthogonal, RangeError
from .gates import bell_state
from .ks import OrthoStructure, RaySet, ortho_structure
from .linalg import Basis3, Ray3, as_ray, complete_basis, density, depolarize, joint_distribution


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "depolarizing"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise RangeError(f"noise parameter must lie in [0, 1], got {self.p}")

    @classmethod
    def depolarizing(cls, p: float) -> "NoiseSpec":
        return cls("depolarizing", p) if p > 0 else cls()

    @property
    def effective_p(self) -> float:
        return self.p if self.kind == "depolarizing" else 0.0

    def state(self) -> np.ndarray:
        """The noisy shared state ``(1-p)|phi0><phi0| + p I/9``."""
        return depolarize(density(bell_state(0)), self.effective_p)


@dataclass(frozen=True)
class RoundInput:
    v1: Ray3
    v2: Ray3
    bob_choice: int

    def __post_init__(self):
        object.__setattr__(self, "v1", as_ray(self.v1))
        object.__setattr__(self, "v2", as_ray(self.v2))
        if not self.v1.is_orthogonal(self.v2):
            raise NotOrthogonal(f"round input rays are not orthogonal: {self.v1!r}, {self.v2!r}")
        if self.bob_choice not in (0, 1):
            raise ValueError("bob_choice must be 0 or 1")

    @property
    def v_l(self) -> Ray3:
        return self.v1 if self.bob_choice == 0 else self.v2


@dataclass(frozen=True)
class RoundRecord:
    input: RoundInput
    alice_outcome: int
    bob_outcome: int
    bob_announcement: int
    kept: bool
    matched: bool


def alice_basis(v1, v2) -> Basis3:
    return complete_basis([v1, v2])


def bob_basis(v_l) -> Basis3:
    return complete_basis([v_l])


def sample_outcome(table: np.ndarray, u: float) -> tuple[int, int]:
    """Inverse-CDF draw of ``(alice, bob)`` from a 3x3 table with one uniform ``u``."""
    cdf = np.cumsum(table.ravel())
    # side="right" never lands on a zero-probability cell
    k = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), 8)
    return divmod(k, 3)


def _uniform(rng: Union[np.random.Generator, float]) -> float:
    return float(rng) if isinstance(rng, (float, int)) else float(rng.random())


def play_round(state: np.ndarray, inp: RoundInput, rng: Union[np.random.Generator, float]) -> RoundRecord:
    """Play one round; ``rng`` is a generator or a pre-drawn uniform in [0, 1)."""
    ba = alice_basis(inp.v1, inp.v2)
    bb = bob_basis(inp.v_l)
    table = joint_distribution(state, ba, bb)
    a, b = sample_outcome(table, _uniform(rng))
    return make_record(inp, a, b)


def make_record(inp: RoundInput, alice_outcome: int, bob_outcome: int) -> RoundRecord:
    announcement = 0 if bob_outcome == 0 else 1
    # Alice's basis is (v1, v2, v1 x v2), so v_l sits at index bob_choice
    matched = alice_outcome == inp.bob_choice
    return RoundRecord(inp, alice_outcome, bob_outcome, announcement, announcement == 0, matched)


def simulate_rounds(
    state: np.ndarray,
    rayset: RaySet,
    rounds: int,
    rng: np.random.Generator,
    structure: Optional[OrthoStructure] = None,
) -> list[RoundRecord]:
    """Play ``rounds`` independent rounds with random pairs and fair Bob coins.

    Outcome tables are cached per (pair, choice), so this is much faster than
    calling :func:`play_round` in a loop but follows the same sampling law.
    """
    structure = structure or ortho_structure(rayset)
    pairs = structure.pairs
    pair_idx = rng.integers(len(pairs), size=rounds)
    choices = rng.integers(2, size=rounds)
    uniforms = rng.random(rounds)
    cache: dict = {}
    records = []
    for k, c, u in zip(pair_idx.tolist(), choices.tolist(), uniforms.tolist()):
        key = (k, c)
        if key not in cache:
            i, j = pairs[k]
            inp = RoundInput(rayset.rays[i], rayset.rays[j], c)
            table = joint_distribution(state, alice_basis(inp.v1, inp.v2), bob_basis(inp.v_l))
            cache[key] = (inp, table)
        inp, table = cache[key]
        a, b = sample_outcome(table, u)
        records.append(make_record(inp, a, b))
    return records


def eta_from_p(p: float) -> float:
    """Conditional mismatch rate of kept rounds under depolarizing noise ``p``."""
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"p must lie in [0, 1], got {p}")
    return 2.0 * p / 3.0


def p_from_eta(eta: float) -> float:
    if not 0.0 <= eta <= 2.0 / 3.0:
        raise RangeError(f"eta must lie in [0, 2/3], got {eta}")
    return min(1.0, 1.5 * eta)


# ---------------------------------------------------------------------------
# classical strategies


def classical_bound(d: int) -> float:
    """Best success probability of the common-vector event without entanglement."""
    if d < 2:
        raise RangeError(f"dimension must be at least 2, got {d}")
    return 1.0 / d


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic strategy: Alice maps each input tuple to the index she
    colours 1; Bob maps each ray to the colour he gives it."""

    alice: tuple
    bob: dict


def random_classical_strategy(
    tuples: Sequence[Sequence[Ray3]], rng: np.random.Generator
) -> ClassicalStrategy:
    d = len(tuples[0])
    alice = tuple(rng.integers(d, size=len(tuples)).tolist())
    rays = list(dict.fromkeys(r for t in tuples for r in t))  # first-seen order
    bob = dict(zip(rays, rng.integers(2, size=len(rays)).tolist()))
    return ClassicalStrategy(alice, bob)


def classical_win(strategy: ClassicalStrategy, t: int, ell: int, tuples) -> bool:
    """Both players single out Bob's vector: Alice colours it 1 and so does Bob."""
    ray = tuples[t][ell]
    return strategy.alice[t] == ell and strategy.bob[ray] == 1


def classical_win_rate(
    strategy: ClassicalStrategy, tuples, rounds: int, rng: np.random.Generator
) -> float:
    """Monte-Carlo win rate with uniformly random tuple and uniform ``v_l``
    among Alice's ``d`` vectors."""
    d = len(tuples[0])
    ts = rng.integers(len(tuples), size=rounds)
    ells = rng.integers(d, size=rounds)
    wins = sum(classical_win(strategy, int(t), int(l), tuples) for t, l in zip(ts, ells))
    return wins / rounds


def classical_win_probability(strategy: ClassicalStrategy, tuples) -> float:
    """Exact win probability over uniform inputs.

    For each tuple only ``ell = alice[t]`` can win, so the sum runs over tuples.
    """
    d = len(tuples[0])
    wins = sum(strategy.bob[tuples[t][a]] for t, a in enumerate(strategy.alice))
    return wins / (len(tuples) * d)
