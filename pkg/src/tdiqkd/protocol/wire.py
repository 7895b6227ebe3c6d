"""Line-oriented wire format for the classical channel.

Each message is one line ``TYPE|round|field=value,field=value``.  ``round``
is empty for session-level messages.  Vectors are three ``%.17g`` decimals
joined by ``;`` so every float survives a round trip bit-exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import WireFormatError

# field kinds per message type; fields marked optional may be omitted
SCHEMA: dict[str, dict[str, tuple[str, bool]]] = {
    "VECTORS": {"v1": ("vec", False), "v2": ("vec", False)},
    "ANNOUNCE": {"bit": ("int", False)},
    "TEST_SET": {"indices": ("ints", False)},
    "TEST_REVEAL": {"choices": ("bits", False)},
    "VERDICT": {"accept": ("int", False), "failure": ("float", False), "reason": ("str", False)},
    "PARITY": {"start": ("int", False), "end": ("int", False), "parity": ("int", True)},
    "PA_SEED": {"seed": ("bits", False), "length": ("int", False), "sizing": ("str", False)},
    "DONE": {"stage": ("str", False), "hash": ("str", True), "reason": ("str", True)},
}

_TOKEN = re.compile(r"^[A-Za-z0-9_.:()+\-]*$")


def _fmt_float(x: float) -> str:
    return "%.17g" % x


def _encode(kind: str, value: Any) -> str:
    if kind == "int":
        return str(int(value))
    if kind == "float":
        return _fmt_float(float(value))
    if kind == "vec":
        return ";".join(_fmt_float(float(c)) for c in value)
    if kind == "ints":
        return ";".join(str(int(v)) for v in value)
    if kind == "bits":
        return "".join("1" if int(b) else "0" for b in value)
    if kind == "str":
        s = str(value)
        if not _TOKEN.match(s):
            raise WireFormatError(f"string field contains reserved characters: {s!r}")
        return s
    raise WireFormatError(f"unknown field kind {kind}")


def _decode(kind: str, text: str) -> Any:
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "vec":
            parts = text.split(";")
            if len(parts) != 3:
                raise WireFormatError(f"vector needs three components: {text!r}")
            return tuple(float(p) for p in parts)
        if kind == "ints":
            return tuple(int(p) for p in text.split(";")) if text else ()
        if kind == "bits":
            if set(text) - {"0", "1"}:
                raise WireFormatError(f"bad bit string {text!r}")
            return text
        if kind == "str":
            return text
    except ValueError as exc:
        raise WireFormatError(str(exc)) from None
    raise WireFormatError(f"unknown field kind {kind}")


@dataclass(frozen=True)
class WireMessage:
    type: str
    round: Optional[int] = None
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.type not in SCHEMA:
            raise WireFormatError(f"unknown message type {self.type!r}")

    def __getitem__(self, key: str) -> Any:
        return self.payload[key]

    def get(self, key: str, default=None):
        return self.payload.get(key, default)

    def serialize(self) -> str:
        schema = SCHEMA[self.type]
        unknown = set(self.payload) - set(schema)
        if unknown:
            raise WireFormatError(f"{self.type} has no field(s) {sorted(unknown)}")
        fields = []
        for name, (kind, optional) in schema.items():
            if name not in self.payload or self.payload[name] is None:
                if optional:
                    continue
                raise WireFormatError(f"{self.type} is missing field {name!r}")
            fields.append(f"{name}={_encode(kind, self.payload[name])}")
        rnd = "" if self.round is None else str(self.round)
        return f"{self.type}|{rnd}|{','.join(fields)}"

    @classmethod
    def parse(cls, line: str) -> "WireMessage":
        parts = line.rstrip("\n").split("|")
        if len(parts) != 3:
            raise WireFormatError(f"expected 'TYPE|round|fields', got {line!r}")
        mtype, rnd, body = parts
        if mtype not in SCHEMA:
            raise WireFormatError(f"unknown message type {mtype!r}")
        schema = SCHEMA[mtype]
        payload = {}
        if body:
            for item in body.split(","):
                name, sep, value = item.partition("=")
                if not sep or name not in schema:
                    raise WireFormatError(f"bad field {item!r} in {mtype}")
                payload[name] = _decode(schema[name][0], value)
        missing = [n for n, (_, opt) in schema.items() if not opt and n not in payload]
        if missing:
            raise WireFormatError(f"{mtype} is missing field(s) {missing}")
        try:
            round_ = int(rnd) if rnd else None
        except ValueError:
            raise WireFormatError(f"bad round index {rnd!r}") from None
        return cls(mtype, round_, payload)
