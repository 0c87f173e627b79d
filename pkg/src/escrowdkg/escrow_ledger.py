"""The trusted escrow: deposits, bonds, and exact slash/reward/burn accounting.

All amounts are integers in milli-units (``UNIT = 1000`` per currency unit).
Where a per-recipient reward does not divide evenly it is rounded down and
the remainder is burned, so conservation is exact:

    inflow == remaining deposits + remaining bonds + paid out + refunded + burned
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .transcript import entity_name

UNIT = 1000

COMPLAINT_KINDS = ("cm1", "cm2", "cm3", "cm4", "cm5")
RULING_KINDS = COMPLAINT_KINDS + ("fm", "noncooperation")


class LedgerError(Exception):
    pass


def units(amount) -> int:
    """Currency units -> ledger milli-units (accepts ints, Fractions, decimal strings)."""
    from fractions import Fraction

    v = Fraction(str(amount)) * UNIT
    if v.denominator != 1:
        raise ValueError(f"{amount} is not representable in milli-units")
    return int(v)


@dataclass(frozen=True)
class Ruling:
    kind: str
    justified: bool
    prover: int | str | None
    accused: int | None
    transfers: tuple[tuple[int | str, int], ...]
    burn: int
    label: str = ""

    @property
    def slashed(self) -> int:
        return -sum(a for _, a in self.transfers if a < 0)

    @property
    def rewards(self) -> int:
        return sum(a for _, a in self.transfers if a > 0)

    @property
    def net_slashed(self) -> list:
        return [e for e, a in self.transfers if a < 0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "label": self.label or self.kind,
            "justified": self.justified,
            "prover": entity_name(self.prover) if self.prover is not None else None,
            "accused": self.accused,
            "transfers": [[entity_name(e), a] for e, a in self.transfers],
            "burn": self.burn,
        }


def make_ruling(kind, justified, prover, accused, participants, t, delta,
                  framing_reward="full", participant_framer_forfeits=False, label=""):
    """Build the slash/reward/burn ruling for a complaint or framing verdict.

    ``participants`` are the live participant indices; ``delta`` is in ledger
    units. Non-framing rulings always burn at least half a deposit.
    """
    participants = sorted(participants)
    n = len(participants)
    if kind not in RULING_KINDS:
        raise ValueError(f"unknown ruling kind {kind!r}")
    transfers: list[tuple] = []

    def pool_to_others(slashed_entity):
        others = [m for m in participants if m != slashed_entity]
        each = delta // (2 * len(others)) if others else 0
        transfers.append((slashed_entity, -delta))
        transfers.extend((m, each) for m in others)

    if kind == "noncooperation":
        raise ValueError("use EscrowLedger.burn_all for non-cooperation")
    if not justified:
        pool_to_others(prover)
    elif kind == "fm":
        framer = prover
        reward = t * delta if framing_reward == "full" else t * delta // 2
        for m in participants:
            if m != framer or participant_framer_forfeits:
                transfers.append((m, -delta))
        transfers.append((framer, reward))
    elif kind == "cm4":
        transfers.append((accused, -delta))
        transfers.append((prover, delta // 2))
    else:
        pool_to_others(accused)

    slashed = -sum(a for _, a in transfers if a < 0)
    rewards = sum(a for _, a in transfers if a > 0)
    burn = slashed - rewards
    if burn < 0:
        raise LedgerError(f"reward {rewards} exceeds slashed pool {slashed}")
    return Ruling(kind, justified, prover, accused, tuple(transfers), burn, label)


class EscrowLedger:
    def __init__(self):
        self.deposits: dict[int, int] = {}
        self.external_bonds: dict[str, int] = {}
        self.burned_total = 0
        self.paid_out: dict[int | str, int] = {}
        self.refunded: dict[int | str, int] = {}
        self.contributed: dict[int | str, int] = {}
        self.enrolled: set[int] = set()

    @property
    def inflow(self) -> int:
        return sum(self.contributed.values())

    def deposit(self, participant: int, amount: int):
        if amount <= 0:
            raise LedgerError("deposit must be positive")
        if participant in self.enrolled:
            raise LedgerError(f"participant {participant} already deposited")
        self.enrolled.add(participant)
        self.deposits[participant] = amount
        self.contributed[participant] = self.contributed.get(participant, 0) + amount
        return [(entity_name(participant), amount, "deposit")]

    def bond(self, entity: str, amount: int):
        if amount <= 0:
            raise LedgerError("bond must be positive")
        self.external_bonds[entity] = self.external_bonds.get(entity, 0) + amount
        self.contributed[entity] = self.contributed.get(entity, 0) + amount
        return [(entity_name(entity), amount, "bond")]

    def _take(self, entity, amount):
        pot = self.deposits if isinstance(entity, int) else self.external_bonds
        if pot.get(entity, 0) < amount:
            raise LedgerError(f"{entity_name(entity)} holds {pot.get(entity, 0)} < {amount}")
        pot[entity] -= amount

    def apply_ruling(self, ruling: Ruling):
        """Apply atomically: validate every slash first, then mutate."""
        for e, a in ruling.transfers:
            if a < 0:
                pot = self.deposits if isinstance(e, int) else self.external_bonds
                if pot.get(e, 0) < -a:
                    raise LedgerError(f"{entity_name(e)} cannot cover slash of {-a}")
        deltas = []
        reason = ruling.label or ruling.kind
        for e, a in ruling.transfers:
            if a < 0:
                self._take(e, -a)
                deltas.append((entity_name(e), a, f"slash:{reason}"))
            elif a > 0:
                self.paid_out[e] = self.paid_out.get(e, 0) + a
                deltas.append((entity_name(e), a, f"reward:{reason}"))
        self.burned_total += ruling.burn
        deltas.append(("burn", ruling.burn, f"burn:{reason}"))
        return deltas

    def burn_all(self, reason="noncooperation"):
        deltas = []
        total = 0
        for e in sorted(self.deposits):
            amt = self.deposits[e]
            if amt:
                self.deposits[e] = 0
                total += amt
                deltas.append((entity_name(e), -amt, f"slash:{reason}"))
        self.burned_total += total
        deltas.append(("burn", total, f"burn:{reason}"))
        return deltas

    def refund_all(self, reason="refund"):
        deltas = []
        for pot in (self.deposits, self.external_bonds):
            for e in sorted(pot, key=entity_name):
                amt = pot[e]
                if amt:
                    pot[e] = 0
                    self.refunded[e] = self.refunded.get(e, 0) + amt
                    deltas.append((entity_name(e), -amt, reason))
        return deltas

    def holdings(self, entity) -> int:
        return (self.deposits.get(entity, 0) + self.external_bonds.get(entity, 0)
                + self.paid_out.get(entity, 0) + self.refunded.get(entity, 0))

    def net(self, entity) -> int:
        """Everything the entity holds or received, minus what it put in."""
        return self.holdings(entity) - self.contributed.get(entity, 0)

    def remaining(self) -> int:
        return sum(self.deposits.values()) + sum(self.external_bonds.values())

    def conservation_ok(self) -> bool:
        return self.inflow == (self.remaining() + sum(self.paid_out.values())
                               + sum(self.refunded.values()) + self.burned_total)

    def snapshot(self) -> dict:
        return {
            "deposits": {entity_name(k): v for k, v in sorted(self.deposits.items())},
            "external_bonds": dict(sorted(self.external_bonds.items())),
            "paid_out": {entity_name(k): v for k, v in sorted(self.paid_out.items(), key=lambda kv: entity_name(kv[0]))},
            "refunded": {entity_name(k): v for k, v in sorted(self.refunded.items(), key=lambda kv: entity_name(kv[0]))},
            "burned_total": self.burned_total,
            "inflow": self.inflow,
        }
