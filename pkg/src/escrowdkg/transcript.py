"""Append-only event log shared by every protocol, serialized as JSON lines."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .group_suite import digest


def entity_name(entity) -> str:
    return f"P{entity}" if isinstance(entity, int) else str(entity)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Event:
    height: int
    sender: str
    event: str
    payload_hash: str | None = None
    ledger_delta: tuple = ()
    data: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "height": self.height,
            "sender": self.sender,
            "event": self.event,
            "payload_hash": self.payload_hash,
            "ledger_delta": [
                {"entity": e, "amount": a, "reason": r} for e, a, r in self.ledger_delta
            ],
        }
        if self.data:
            d["data"] = self.data
        return d


class Transcript:
    def __init__(self):
        self.events: list[Event] = []
        self.summary: dict[str, Any] = {}

    def log(self, height, sender, event, payload: bytes | None = None, ledger_delta=(), **data):
        ph = digest(payload).hex() if payload is not None else None
        ev = Event(height, entity_name(sender), event, ph, tuple(ledger_delta), data)
        self.events.append(ev)
        return ev

    def of_type(self, *types) -> list[Event]:
        return [e for e in self.events if e.event in types]

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def lines(self) -> list[str]:
        out = [canonical_json(e.to_dict()) for e in self.events]
        if self.summary:
            out.append(canonical_json({"event": "summary", **self.summary}))
        return out

    def to_jsonl(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())
