"""Trusted entanglement source shared by the two endpoints.

Each round's pair is measured jointly once both parties have chosen a basis.
The single uniform used for that round comes from a substream keyed by the
round index, so outcomes do not depend on which party measures first.
"""

from __future__ import annotations

import threading

import numpy as np

from ..game import sample_outcome
from ..linalg import Basis3, joint_distribution
from ..streams import SOURCE, substream


class EntangledSource:
    def __init__(self, state: np.ndarray, seed: int):
        self.state = state
        self.seed = seed
        self._bases: dict = {}
        self._outcomes: dict = {}
        self._tables: dict = {}
        self._cond = threading.Condition()

    def submit(self, round_: int, party: str, basis: Basis3) -> None:
        """Register ``party``'s measurement basis (``"A"`` or ``"B"``) for a round."""
        with self._cond:
            slot = self._bases.setdefault(round_, {})
            if party in slot:
                raise RuntimeError(f"party {party} already measured round {round_}")
            slot[party] = basis
            if len(slot) == 2:
                a, b = self._measure(round_, slot["A"], slot["B"])
                self._outcomes[round_] = {"A": a, "B": b}
                del self._bases[round_]
                self._cond.notify_all()

    def outcome(self, round_: int, party: str) -> int:
        """Block until the round is measured and return ``party``'s outcome index."""
        with self._cond:
            self._cond.wait_for(lambda: round_ in self._outcomes, timeout=120.0)
            if round_ not in self._outcomes:
                raise TimeoutError(f"round {round_} was never measured by both parties")
            return self._outcomes[round_][party]

    def measure(self, round_: int, party: str, basis: Basis3) -> int:
        self.submit(round_, party, basis)
        return self.outcome(round_, party)

    def _measure(self, round_: int, basis_a: Basis3, basis_b: Basis3) -> tuple[int, int]:
        key = (basis_a, basis_b)
        table = self._tables.get(key)
        if table is None:
            table = self._tables[key] = joint_distribution(self.state, basis_a, basis_b)
        u = float(substream(self.seed, SOURCE, round_).random())
        return sample_outcome(table, u)
