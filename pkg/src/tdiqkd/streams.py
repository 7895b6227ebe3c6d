"""Deterministic random substreams derived from one session seed."""

import numpy as np

ALICE = 0
BOB = 1
SOURCE = 2
GAME = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key...)``; same inputs give the same stream."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))
