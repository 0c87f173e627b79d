"""Behavior scripts for simulated participants.

One variant per participant. The same vocabulary drives Ped-DKG, Escrow-DKG
and Eth-DKG so fault scripts can be replayed across protocols; a protocol
simply ignores variants that have no meaning for it (e.g. dual-pair faults in
single-group Escrow-DKG).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Behavior:
    kind = "abstract"

    @property
    def is_honest_dealer(self) -> bool:
        return True

    @property
    def complains(self) -> bool:
        """Whether this participant files complaints it can detect."""
        return True

    def to_dict(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class Honest(Behavior):
    kind = "honest"


@dataclass(frozen=True)
class Withhold(Behavior):
    """Never publish/send ``tx`` (tx1, tx2 or tx3); tx3 may be restricted to one target."""

    tx: str = "tx3"
    target: int | None = None
    respond_on_alert: bool = False
    kind = "withhold"

    @property
    def is_honest_dealer(self):
        return False

    def withholds(self, tx: str, recipient: int | None = None) -> bool:
        if tx != self.tx:
            return False
        return self.target is None or recipient is None or recipient == self.target


@dataclass(frozen=True)
class BadHashCommit(Behavior):
    kind = "bad_hash_commit"

    @property
    def is_honest_dealer(self):
        return False


@dataclass(frozen=True)
class NonmemberCommitment(Behavior):
    k: int = 0
    kind = "nonmember_commitment"

    @property
    def is_honest_dealer(self):
        return False


@dataclass(frozen=True)
class InconsistentSubshare(Behavior):
    recipient: int | tuple = 1
    reveal_on_complaint: bool = True
    kind = "inconsistent_subshare"

    @property
    def is_honest_dealer(self):
        return False

    @property
    def recipients(self) -> tuple[int, ...]:
        r = self.recipient
        return tuple(r) if isinstance(r, (tuple, list)) else (r,)


@dataclass(frozen=True)
class InconsistentDualPair(Behavior):
    k0: int = 0
    kind = "inconsistent_dual_pair"

    @property
    def is_honest_dealer(self):
        return False


@dataclass(frozen=True)
class DigestMismatch(Behavior):
    recipient: int = 1
    kind = "digest_mismatch"

    @property
    def is_honest_dealer(self):
        return False


@dataclass(frozen=True)
class UnjustComplainer(Behavior):
    complaint: str = "cm4"
    target: int = 1
    kind = "unjust_complainer"


@dataclass(frozen=True)
class SilentNonComplainer(Behavior):
    kind = "silent_non_complainer"

    @property
    def complains(self):
        return False


@dataclass(frozen=True)
class BadPublicData(Behavior):
    """Publishes a wrong public key share g^{f(i)} after conclusion (cm5 target)."""

    kind = "bad_public_data"


@dataclass(frozen=True)
class Colluder(Behavior):
    group: str = "A"
    kind = "colluder"


@dataclass(frozen=True)
class Framer(Behavior):
    """Colludes in ``group`` and files fm at ``trigger_height``.

    evidence: "secret" (reconstructed f(0)) or "early_beacon" (next beacon value
    released before its schedule). external=True hands the evidence to an
    outside bonded entity who files instead.
    """

    trigger_height: int = 0
    group: str | None = "A"
    evidence: str = "secret"
    external: bool = False
    kind = "framer"


@dataclass(frozen=True)
class SilentNoncooperator(Behavior):
    kind = "silent_noncooperator"


VARIANTS = {
    cls.kind: cls
    for cls in (
        Honest, Withhold, BadHashCommit, NonmemberCommitment, InconsistentSubshare,
        InconsistentDualPair, DigestMismatch, UnjustComplainer, SilentNonComplainer,
        BadPublicData, Colluder, Framer, SilentNoncooperator,
    )
}

HONEST = Honest()


def parse_behavior(obj) -> Behavior:
    if isinstance(obj, Behavior):
        return obj
    if isinstance(obj, str):
        obj = {"kind": obj}
    obj = dict(obj)
    kind = obj.pop("kind", None)
    if kind not in VARIANTS:
        raise ValueError(f"unknown behavior {kind!r}")
    cls = VARIANTS[kind]
    allowed = {f.name for f in fields(cls)}
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"behavior {kind!r} has no fields {sorted(extra)}")
    if isinstance(obj.get("recipient"), list):
        obj["recipient"] = tuple(obj["recipient"])
    return cls(**obj)


def collusion_groups(behaviors) -> dict[str, list[int]]:
    """Group id -> sorted 1-based member indices (framers count as members)."""
    groups: dict[str, list[int]] = {}
    for i, b in enumerate(behaviors, start=1):
        gid = getattr(b, "group", None) if isinstance(b, (Colluder, Framer)) else None
        if gid is not None:
            groups.setdefault(gid, []).append(i)
    return groups
