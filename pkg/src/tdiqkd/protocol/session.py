"""End-to-end key distribution session between two endpoint threads."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

from ..errors import RangeError
from ..game import NoiseSpec
from ..ks import RaySet, builtin_rayset, ortho_structure
from ..streams import ALICE, BOB, substream
from . import postprocess as pp
from .endpoints import COMPLETED, AliceParams, EndpointResult, run_alice, run_bob
from .source import EntangledSource
from .transport import ChannelClosed, channel_pair
from .wire import WireMessage


@dataclass(frozen=True)
class SessionConfig:
    rounds: int
    eta_tolerance: float = 0.05
    gamma: float = 0.2
    noise: NoiseSpec = NoiseSpec()
    block_size: int = 8
    seed: int = 0
    epsilon_sec: float = 1e-9
    rate_fn: str = "h2"
    finite_key_c: float = 0.0
    rayset: Optional[RaySet] = None
    transport: str = "memory"

    def __post_init__(self):
        if self.rounds < 0:
            raise RangeError("round count must be non-negative")
        if not 0.0 < self.gamma < 1.0:
            raise RangeError(f"gamma must lie strictly inside (0, 1), got {self.gamma}")
        if not 0.0 <= self.eta_tolerance < 2.0 / 3.0:
            raise RangeError(f"eta tolerance must lie in [0, 2/3), got {self.eta_tolerance}")
        if self.block_size <= 0:
            raise RangeError("block size must be positive")
        if not 0.0 < self.epsilon_sec < 1.0:
            raise RangeError("epsilon_sec must lie in (0, 1)")
        if self.rate_fn not in pp.RATE_FUNCTIONS:
            raise ValueError(f"rate_fn must be one of {pp.RATE_FUNCTIONS}")
        if self.finite_key_c < 0:
            raise RangeError("finite-key constant must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise RangeError("seed must be a 64-bit unsigned integer")


@dataclass
class SessionTranscript:
    """Everything a session produced, as seen from Alice's side of the channel.

    ``messages`` holds ``(sender, WireMessage)`` pairs with sender ``"A"`` or
    ``"B"``, in the order Alice sent or received them.
    """

    rounds: int
    messages: list = field(default_factory=list)
    kept_indices: list = field(default_factory=list)
    test_indices: list = field(default_factory=list)
    observed_failure: Optional[float] = None
    raw_key_a: str = ""
    raw_key_b: str = ""
    leakage_bits: int = 0
    final_key_a: str = ""
    final_key_b: str = ""
    outcome: str = COMPLETED
    sizing: str = ""
    output_length: int = 0
    hash_verified: Optional[bool] = None

    @property
    def completed(self) -> bool:
        return self.outcome == COMPLETED

    @property
    def abort_reason(self) -> Optional[str]:
        return None if self.completed else self.outcome

    @property
    def status(self) -> str:
        return COMPLETED if self.completed else f"Aborted({self.outcome})"

    @property
    def discarded(self) -> int:
        return self.rounds - len(self.kept_indices)

    def dumps(self) -> str:
        head = [
            ("rounds", self.rounds),
            ("outcome", self.status),
            ("kept", ";".join(map(str, self.kept_indices))),
            ("tested", ";".join(map(str, self.test_indices))),
            ("observed_failure", "" if self.observed_failure is None else "%.17g" % self.observed_failure),
            ("raw_key_a", self.raw_key_a),
            ("raw_key_b", self.raw_key_b),
            ("leakage_bits", self.leakage_bits),
            ("hash_verified", "" if self.hash_verified is None else int(self.hash_verified)),
            ("sizing", self.sizing),
            ("output_length", self.output_length),
            ("final_key_a", self.final_key_a),
            ("final_key_b", self.final_key_b),
        ]
        lines = [f"@{k}={v}" for k, v in head]
        lines += [f"{sender} {msg.serialize()}" for sender, msg in self.messages]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SessionTranscript":
        head = {}
        messages = []
        for line in text.splitlines():
            if line.startswith("@"):
                k, _, v = line[1:].partition("=")
                head[k] = v
            elif line:
                sender, _, wire = line.partition(" ")
                messages.append((sender, WireMessage.parse(wire)))
        ints = lambda s: [int(x) for x in s.split(";")] if s else []  # noqa: E731
        status = head["outcome"]
        outcome = status[len("Aborted(") : -1] if status.startswith("Aborted(") else status
        return cls(
            rounds=int(head["rounds"]),
            messages=messages,
            kept_indices=ints(head["kept"]),
            test_indices=ints(head["tested"]),
            observed_failure=float(head["observed_failure"]) if head["observed_failure"] else None,
            raw_key_a=head["raw_key_a"],
            raw_key_b=head["raw_key_b"],
            leakage_bits=int(head["leakage_bits"]),
            final_key_a=head["final_key_a"],
            final_key_b=head["final_key_b"],
            outcome=outcome,
            sizing=head["sizing"],
            output_length=int(head["output_length"]),
            hash_verified=bool(int(head["hash_verified"])) if head["hash_verified"] else None,
        )


def run_session(config: SessionConfig) -> SessionTranscript:
    """Run one session: distribution, sifting, testing, extraction,
    reconciliation and privacy amplification."""
    rayset = config.rayset or builtin_rayset("peres33")
    structure = ortho_structure(rayset)
    source = EntangledSource(config.noise.state(), config.seed)
    log: list = []
    chan_a, chan_b = channel_pair(config.transport, log_a=log)
    params = AliceParams(
        config.rounds,
        config.gamma,
        config.eta_tolerance,
        config.block_size,
        config.epsilon_sec,
        config.rate_fn,
        config.finite_key_c,
    )
    results: dict = {}
    errors: list = []

    def guarded(name, fn, *args):
        try:
            results[name] = fn(*args)
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)
            # unblock the peer
            chan_a.close()
            chan_b.close()

    threads = [
        threading.Thread(
            target=guarded,
            args=("A", run_alice, params, rayset, structure, chan_a, source, substream(config.seed, ALICE)),
            name="alice",
        ),
        threading.Thread(
            target=guarded,
            args=("B", run_bob, config.rounds, config.block_size, chan_b, source, substream(config.seed, BOB)),
            name="bob",
        ),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    chan_a.close()
    chan_b.close()
    if errors:
        # the peer of a crashed endpoint only sees the channel close
        primary = [e for e in errors if not isinstance(e, ChannelClosed)]
        raise (primary or errors)[0]

    alice: EndpointResult = results["A"]
    bob: EndpointResult = results["B"]
    messages = [("A" if d == "send" else "B", WireMessage.parse(line)) for d, line in log]
    return SessionTranscript(
        rounds=config.rounds,
        messages=messages,
        kept_indices=alice.kept,
        test_indices=alice.tested,
        observed_failure=alice.observed_failure,
        raw_key_a=pp.bits_str(alice.raw_key),
        raw_key_b=pp.bits_str(bob.raw_key),
        leakage_bits=alice.leakage_bits,
        final_key_a=pp.bits_str(alice.final_key),
        final_key_b=pp.bits_str(bob.final_key),
        outcome=alice.outcome,
        sizing=alice.sizing,
        output_length=alice.output_length,
        hash_verified=alice.hash_verified,
    )
