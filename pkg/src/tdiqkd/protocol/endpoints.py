"""Alice and Bob as independent message-driven programs.

Each endpoint is a plain function run on its own thread.  They share nothing
but the channel and the entanglement source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..game import alice_basis, bob_basis
from ..ks import OrthoStructure, RaySet, pick_orthogonal_pair
from ..linalg import Ray3
from . import postprocess as pp
from .source import EntangledSource
from .transport import Channel
from .wire import WireMessage

COMPLETED = "Completed"
TEST_FAILED = "TestFailed"
EMPTY_KEY = "EmptyKey"
HASH_MISMATCH = "HashMismatch"


class ProtocolError(RuntimeError):
    """The peer sent something the protocol does not allow here."""


def _expect(msg: WireMessage, *types: str) -> WireMessage:
    if msg.type not in types:
        raise ProtocolError(f"expected {' or '.join(types)}, got {msg.type}")
    return msg


@dataclass
class EndpointResult:
    outcome: str = COMPLETED
    kept: list = field(default_factory=list)
    tested: list = field(default_factory=list)
    observed_failure: Optional[float] = None
    raw_key: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    reconciled_key: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    final_key: np.ndarray = field(default_factory=lambda: np.zeros(0, np.uint8))
    leakage_bits: int = 0
    output_length: int = 0
    sizing: str = ""
    hash_verified: Optional[bool] = None


@dataclass(frozen=True)
class AliceParams:
    rounds: int
    gamma: float
    eta_tolerance: float
    block_size: int
    epsilon_sec: float
    rate_fn: str
    finite_key_c: float


def run_alice(
    params: AliceParams,
    rayset: RaySet,
    structure: OrthoStructure,
    channel: Channel,
    source: EntangledSource,
    rng: np.random.Generator,
) -> EndpointResult:
    res = EndpointResult()
    n = params.rounds

    # distribution: Alice registers her basis before Bob learns the vectors
    for i in range(n):
        v1, v2 = pick_orthogonal_pair(rayset, rng, structure)
        source.submit(i, "A", alice_basis(v1, v2))
        channel.send(WireMessage("VECTORS", i, {"v1": v1.components, "v2": v2.components}))
    announcements = []
    for i in range(n):
        msg = _expect(channel.recv(), "ANNOUNCE")
        if msg.round != i:
            raise ProtocolError(f"announcement for round {msg.round}, expected {i}")
        announcements.append(msg["bit"])
    outcomes = [source.outcome(i, "A") for i in range(n)]

    kept = [i for i, bit in enumerate(announcements) if bit == 0]
    res.kept = kept
    if not kept:
        channel.send(WireMessage("VERDICT", None, {"accept": 0, "failure": 0.0, "reason": EMPTY_KEY}))
        res.outcome = EMPTY_KEY
        return res

    # parameter estimation on Alice's random subset
    tested = pp.sample_test_set(kept, params.gamma, rng)
    res.tested = tested
    channel.send(WireMessage("TEST_SET", None, {"indices": tested}))
    choices = _expect(channel.recv(), "TEST_REVEAL")["choices"]
    if len(choices) != len(tested):
        raise ProtocolError("TEST_REVEAL length does not match TEST_SET")
    matched = [outcomes[i] == int(c) for i, c in zip(tested, choices)]
    accepted, failure = pp.judge(matched, params.eta_tolerance)
    res.observed_failure = failure
    tested_set = set(tested)
    key_rounds = [i for i in kept if i not in tested_set]
    if not accepted:
        reason = TEST_FAILED
    elif not key_rounds:
        reason = EMPTY_KEY
    else:
        reason = COMPLETED
    channel.send(WireMessage("VERDICT", None, {"accept": int(reason == COMPLETED), "failure": failure, "reason": reason}))
    if reason != COMPLETED:
        res.outcome = reason
        return res

    raw = np.array([pp.alice_bit(outcomes[i], rng) for i in key_rounds], dtype=np.uint8)
    res.raw_key = raw

    # reconciliation: Alice discloses parities, Bob drives the bisection
    for s, e in pp.block_ranges(len(raw), params.block_size):
        channel.send(WireMessage("PARITY", None, {"start": s, "end": e, "parity": pp.parity(raw, s, e)}))
        res.leakage_bits += 1
    while True:
        msg = _expect(channel.recv(), "PARITY", "DONE")
        if msg.type == "DONE":
            break
        s, e = msg["start"], msg["end"]
        channel.send(WireMessage("PARITY", None, {"start": s, "end": e, "parity": pp.parity(raw, s, e)}))
        res.leakage_bits += 1
    res.reconciled_key = raw
    res.hash_verified = msg.get("hash") == pp.key_hash(raw)
    if not res.hash_verified:
        channel.send(WireMessage("DONE", None, {"stage": "abort", "reason": HASH_MISMATCH}))
        res.outcome = HASH_MISMATCH
        return res

    # privacy amplification
    length = pp.output_length(
        len(raw), failure, res.leakage_bits, params.epsilon_sec, params.rate_fn, params.finite_key_c
    )
    seed_len = len(raw) + length - 1 if length else 0
    seed = rng.integers(2, size=seed_len, dtype=np.uint8)
    res.output_length = length
    res.sizing = pp.sizing_marker(params.finite_key_c)
    channel.send(WireMessage("PA_SEED", None, {"seed": seed, "length": length, "sizing": res.sizing}))
    res.final_key = pp.privacy_amplify(raw, length, seed)
    channel.send(WireMessage("DONE", None, {"stage": "final", "hash": pp.key_hash(res.final_key)}))
    return res


def run_bob(
    rounds: int,
    block_size: int,
    channel: Channel,
    source: EntangledSource,
    rng: np.random.Generator,
) -> EndpointResult:
    res = EndpointResult()
    choices = []
    announcements = []
    for i in range(rounds):
        msg = _expect(channel.recv(), "VECTORS")
        if msg.round != i:
            raise ProtocolError(f"vectors for round {msg.round}, expected {i}")
        choice = int(rng.integers(2))
        v_l = Ray3(msg["v1"] if choice == 0 else msg["v2"])
        outcome = source.measure(i, "B", bob_basis(v_l))
        bit = 0 if outcome == 0 else 1
        choices.append(choice)
        announcements.append(bit)
        channel.send(WireMessage("ANNOUNCE", i, {"bit": bit}))
    res.kept = [i for i, bit in enumerate(announcements) if bit == 0]

    msg = _expect(channel.recv(), "TEST_SET", "VERDICT")
    if msg.type == "TEST_SET":
        tested = list(msg["indices"])
        if not set(tested) <= set(res.kept):
            raise ProtocolError("TEST_SET contains rounds that were not kept")
        res.tested = tested
        channel.send(WireMessage("TEST_REVEAL", None, {"choices": [choices[i] for i in tested]}))
        msg = _expect(channel.recv(), "VERDICT")
    res.observed_failure = msg["failure"]
    if not msg["accept"]:
        res.outcome = msg["reason"]
        return res

    tested_set = set(res.tested)
    key = np.array([choices[i] for i in res.kept if i not in tested_set], dtype=np.uint8)
    res.raw_key = key.copy()

    corrected = key.copy()
    alice_parities = []
    for _ in pp.block_ranges(len(key), block_size):
        msg = _expect(channel.recv(), "PARITY")
        alice_parities.append((msg["start"], msg["end"], msg["parity"]))
        res.leakage_bits += 1

    def ask(start: int, end: int) -> int:
        channel.send(WireMessage("PARITY", None, {"start": start, "end": end}))
        reply = _expect(channel.recv(), "PARITY")
        if (reply["start"], reply["end"]) != (start, end) or reply.get("parity") is None:
            raise ProtocolError("parity reply does not answer the request")
        res.leakage_bits += 1
        return reply["parity"]

    for s, e, p in alice_parities:
        if p != pp.parity(corrected, s, e):
            pos = pp.locate_error(corrected, s, e, ask)
            corrected[pos] ^= 1
    res.reconciled_key = corrected
    channel.send(WireMessage("DONE", None, {"stage": "reconcile", "hash": pp.key_hash(corrected)}))

    msg = _expect(channel.recv(), "PA_SEED", "DONE")
    if msg.type == "DONE":
        res.outcome = msg.get("reason") or HASH_MISMATCH
        res.hash_verified = False
        return res
    res.hash_verified = True
    res.output_length = msg["length"]
    res.sizing = msg["sizing"]
    res.final_key = pp.privacy_amplify(corrected, msg["length"], msg["seed"])
    done = _expect(channel.recv(), "DONE")
    if done.get("hash") != pp.key_hash(res.final_key):
        raise ProtocolError("final key digest differs from Alice's")
    return res
