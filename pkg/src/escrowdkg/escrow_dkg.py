"""Escrow-DKG: enrollment, commitments, encrypted sub-shares, verification, conclusion.

The escrow (``EscrowDkg``) is a single-owner phase machine over a logical block
clock. Participants (``EscrowParticipant``) are functions of their own secrets
and the public state; ``run_escrow_dkg`` drives them in index order.

Any complaint filed before conclusion is arbitrated immediately and fails the
run. After conclusion complaints (cm5) and framing (fm) only move money.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

from .behaviors import (
    HONEST,
    BadHashCommit,
    BadPublicData,
    InconsistentSubshare,
    NonmemberCommitment,
    UnjustComplainer,
    Withhold,
    parse_behavior,
)
from .escrow_ledger import EscrowLedger, Ruling, make_ruling, units
from .group_suite import G2, GroupElement, GroupSuite
from .secret_sharing import (
    CommitmentVector,
    ElGamalCiphertext,
    commit,
    elgamal_decrypt,
    elgamal_encrypt,
    elgamal_keygen,
    hash_commit,
    public_share,
    verify_subshare,
)
from .seeding import derive_rng, participant_polynomial
from .transcript import Transcript, entity_name


class Phase(str, enum.Enum):
    DEPLOYED = "Deployed"
    ENROLLMENT = "Enrollment"
    COMMITMENTS = "Commitments"
    SUBSHARES = "SubShares"
    VERIFICATION = "Verification"
    CONCLUDED = "Concluded"
    FAILED = "Failed"


_ORDER = [Phase.DEPLOYED, Phase.ENROLLMENT, Phase.COMMITMENTS, Phase.SUBSHARES,
          Phase.VERIFICATION, Phase.CONCLUDED]


class ProtocolError(Exception):
    """Harness misuse: wrong phase, duplicate enrollment, terminal state, ..."""


class ComplaintRejected(ProtocolError):
    pass


@dataclass(frozen=True)
class DkgConfig:
    n: int = 5
    t: int = 2
    delta: Any = 100  # currency units
    epoch: int = 10  # blocks per phase
    framing_reward: str = "full"  # or "half"
    participant_framer_forfeits: bool = False
    tag: str = G2

    def __post_init__(self):
        if self.t < 1 or self.n < self.t + 1:
            raise ValueError(f"need 1 <= t < n (t={self.t}, n={self.n})")
        if self.epoch < 1:
            raise ValueError("epoch must be at least one block")
        if self.framing_reward not in ("full", "half"):
            raise ValueError("framing_reward must be 'full' or 'half'")
        if units(self.delta) <= 0:
            raise ValueError("deposit must be positive")

    @property
    def deposit(self) -> int:
        return units(self.delta)


@dataclass
class ParticipantRecord:
    index: int
    enc_pub: GroupElement
    hash_commitment: bytes
    deposited: bool = True
    commitments: CommitmentVector | None = None
    received_subshares: dict[int, int] = field(default_factory=dict)
    secret_share: int | None = None


@dataclass(frozen=True)
class TxPub:
    sender: int | str
    about: int | None  # participant index for g^{f(i)}, None for the global key
    value: GroupElement


@dataclass(frozen=True)
class FramingEvidence:
    kind: str  # "secret" or "early_beacon"
    secret: int | None = None
    round: int | None = None
    signature: GroupElement | None = None


@dataclass(frozen=True)
class Complaint:
    kind: str
    prover: int | str
    accused: int | None = None
    recipient: int | None = None  # cm3/cm4: the sub-share recipient
    xi: int | None = None  # cm4: recipient's decryption key
    pub_index: int | None = None  # cm5: which tx_pub
    framing: FramingEvidence | None = None

    def describe(self) -> dict:
        d = {"kind": self.kind, "prover": entity_name(self.prover), "accused": self.accused}
        if self.recipient is not None:
            d["recipient"] = self.recipient
        return d


@dataclass
class DkgResult:
    secret_shares: dict[int, int]
    public_key: GroupElement
    public_shares: dict[int, GroupElement]
    commitments: dict[int, CommitmentVector]
    qual: list[int]


class EscrowDkg:
    def __init__(self, suite: GroupSuite, config: DkgConfig, transcript=None, ledger=None):
        self.suite = suite
        self.config = config
        self.log = transcript if transcript is not None else Transcript()
        self.ledger = ledger if ledger is not None else EscrowLedger()
        self.phase = Phase.DEPLOYED
        self.height = 0
        self.phase_start = 0
        self.participants: dict[int, ParticipantRecord] = {}
        self.tx3: dict[tuple[int, int], ElGamalCiphertext] = {}
        self.tx_pub: list[TxPub] = []
        self.rulings: list[Ruling] = []
        self.failure: str | None = None
        self.concluded_at: int | None = None
        self.slashed: set[int | str] = set()
        self.revealed_shares: dict[int, int] = {}
        self.framed = False
        self.halted = False
        self.beacon = None  # set by the application layer for early-release framing
        self.log.log(0, "escrow", "deployed", None, **suite.describe(),
                     n=config.n, t=config.t, deposit=config.deposit, epoch=config.epoch)

    # -- clock ------------------------------------------------------------------
    @property
    def terminal(self) -> bool:
        return self.phase in (Phase.CONCLUDED, Phase.FAILED)

    @property
    def deadline(self) -> int:
        return self.phase_start + self.config.epoch

    def start(self):
        if self.phase != Phase.DEPLOYED:
            raise ProtocolError("already started")
        self._enter(Phase.ENROLLMENT)

    def _enter(self, phase: Phase):
        self.phase = phase
        self.phase_start = self.height
        self.log.log(self.height, "escrow", "phase", None, phase=phase.value)

    def advance_block(self):
        if self.phase == Phase.FAILED or (self.phase == Phase.CONCLUDED and self.halted):
            raise ProtocolError("protocol is in a terminal state")
        self.height += 1
        if self.phase == Phase.CONCLUDED:
            return self
        if self.phase == Phase.ENROLLMENT:
            if len(self.participants) == self.config.n:
                self._enter(Phase.COMMITMENTS)
            elif self.height >= self.deadline:
                self.failure = "enrollment incomplete"
                self.phase = Phase.FAILED
                deltas = self.ledger.refund_all("refund:abort")
                self.log.log(self.height, "escrow", "aborted", None, deltas,
                             reason=self.failure, enrolled=sorted(self.participants))
        elif self.height >= self.deadline:
            nxt = _ORDER[_ORDER.index(self.phase) + 1]
            if nxt == Phase.CONCLUDED:
                self._conclude()
            else:
                self._enter(nxt)
        return self

    def phase_elapsed(self, phase: Phase) -> bool:
        if self.phase == Phase.FAILED:
            return False
        return _ORDER.index(self.phase) > _ORDER.index(phase)

    # -- transactions -------------------------------------------------------------
    def _require(self, phase: Phase, who):
        if self.phase != phase:
            raise ProtocolError(f"{entity_name(who)}: {phase.value} tx in phase {self.phase.value}")

    def enroll(self, index: int, enc_pub: GroupElement, hash_commitment: bytes):
        self._require(Phase.ENROLLMENT, index)
        if index in self.participants:
            raise ProtocolError(f"participant {index} already enrolled")
        if not 1 <= index <= self.config.n:
            raise ProtocolError(f"index {index} outside 1..{self.config.n}")
        deltas = self.ledger.deposit(index, self.config.deposit)
        self.participants[index] = ParticipantRecord(index, enc_pub, hash_commitment)
        payload = self.suite.serialize(enc_pub) + hash_commitment
        self.log.log(self.height, index, "tx1", payload, deltas, hash_commitment=hash_commitment.hex())
        return self

    def publish_commitments(self, i: int, C: CommitmentVector):
        self._require(Phase.COMMITMENTS, i)
        rec = self._record(i)
        if rec.commitments is not None:
            raise ProtocolError(f"tx2({i}) already published")
        rec.commitments = C
        self.log.log(self.height, i, "tx2", b"".join(self.suite.serialize(X) for X in C.elements))
        return self

    def publish_subshare(self, i: int, j: int, ct: ElGamalCiphertext):
        self._require(Phase.SUBSHARES, i)
        self._record(i)
        self._record(j)
        if (i, j) in self.tx3:
            raise ProtocolError(f"tx3({i},{j}) already published")
        self.tx3[(i, j)] = ct
        self.log.log(self.height, i, "tx3", self.suite.serialize(ct.c1) + self.suite.serialize_scalar(ct.c2),
                     recipient=j)
        return self

    def publish_public(self, sender, about: int | None, value: GroupElement) -> int:
        if self.phase != Phase.CONCLUDED:
            raise ProtocolError("public data is submitted after conclusion")
        self.tx_pub.append(TxPub(sender, about, value))
        self.log.log(self.height, sender, "tx_pub", self.suite.serialize(value), about=about)
        return len(self.tx_pub) - 1

    def _record(self, i) -> ParticipantRecord:
        if i not in self.participants:
            raise ProtocolError(f"participant {i} not enrolled")
        return self.participants[i]

    # -- complaints -----------------------------------------------------------------
    def complaint_legal(self, c: Complaint) -> bool:
        live = self.phase not in (Phase.FAILED,) and not self.halted and not self.framed
        if not live:
            return False
        if c.kind == "fm":
            return self.phase == Phase.CONCLUDED
        if c.kind == "cm5":
            return self.phase == Phase.CONCLUDED and c.pub_index is not None and c.pub_index < len(self.tx_pub)
        if self.phase == Phase.CONCLUDED:
            return False
        if c.kind == "cm1":
            return self.phase_elapsed(Phase.COMMITMENTS)
        if c.kind == "cm2":
            return self.phase_elapsed(Phase.ENROLLMENT)
        if c.kind == "cm3":
            return self.phase_elapsed(Phase.SUBSHARES)
        if c.kind == "cm4":
            return self.phase in (Phase.SUBSHARES, Phase.VERIFICATION)
        return False

    def _bonded(self, entity) -> bool:
        if isinstance(entity, int):
            return self.ledger.deposits.get(entity, 0) >= self.config.deposit
        return self.ledger.external_bonds.get(entity, 0) >= self.config.deposit

    def live_participants(self) -> list[int]:
        return sorted(i for i in self.participants if self.ledger.deposits.get(i, 0) > 0)

    def file_complaint(self, c: Complaint) -> Ruling:
        if not self.complaint_legal(c):
            raise ComplaintRejected(f"{c.kind} not fileable in phase {self.phase.value}")
        if not self._bonded(c.prover):
            raise ComplaintRejected(f"{entity_name(c.prover)} holds no bond")
        self.log.log(self.height, c.prover, "complaint", None, **c.describe())
        ruling = self.arbitrate(c)
        deltas = self.ledger.apply_ruling(ruling)
        self.rulings.append(ruling)
        self.slashed.update(ruling.net_slashed)
        self.log.log(self.height, "escrow", "ruling", None, deltas, **ruling.to_dict())
        if self.phase != Phase.CONCLUDED:
            self.failure = f"{c.kind} against {entity_name(c.accused)}"
            self.phase = Phase.FAILED
            self.log.log(self.height, "escrow", "failed", None, reason=self.failure)
        elif c.kind == "fm" and ruling.justified:
            self.framed = True
            self.log.log(self.height, "escrow", "framed", None)
        return ruling

    def arbitrate(self, c: Complaint) -> Ruling:
        justified = self._verdict(c)
        return make_ruling(
            c.kind, justified, c.prover, c.accused, self.live_participants(), self.config.t,
            self.config.deposit, self.config.framing_reward, self.config.participant_framer_forfeits)

    def _verdict(self, c: Complaint) -> bool:
        s = self.suite
        if c.kind == "fm":
            return self._framing_valid(c.framing)
        rec = self.participants.get(c.accused)
        if rec is None:
            return False
        if c.kind == "cm1":
            return rec.commitments is None
        if c.kind == "cm2":
            C = rec.commitments
            if not s.is_member(rec.enc_pub):
                return True
            if C is None:
                return False
            if len(C) != self.config.t + 1 or not all(s.is_member(X) for X in C.elements):
                return True
            return hash_commit(s, C[0]) != rec.hash_commitment
        if c.kind == "cm3":
            return c.recipient in self.participants and c.recipient != c.accused and (c.accused, c.recipient) not in self.tx3
        if c.kind == "cm4":
            j = c.prover
            if c.recipient != j or j not in self.participants or c.xi is None:
                return False
            if s.exp(s.g1, c.xi) != self.participants[j].enc_pub:
                return False
            ct = self.tx3.get((c.accused, j))
            if ct is None or rec.commitments is None:
                return False
            x = elgamal_decrypt(s, ct, c.xi)
            return not verify_subshare(s, j, x, rec.commitments)
        if c.kind == "cm5":
            pub = self.tx_pub[c.pub_index]
            if pub.sender != c.accused:
                return False
            return pub.value != self.expected_public(pub.about)
        return False

    def expected_public(self, about: int | None) -> GroupElement:
        commitments = [self.participants[i].commitments for i in sorted(self.participants)]
        if about is None:
            return self.suite.product((C[0] for C in commitments), self.config.tag)
        return public_share(self.suite, commitments, about)

    def _framing_valid(self, ev: FramingEvidence | None) -> bool:
        if ev is None:
            return False
        s = self.suite
        if ev.kind == "secret":
            if ev.secret is None:
                return False
            return s.exp(s.generator(self.config.tag), ev.secret) == self.expected_public(None)
        if ev.kind == "early_beacon" and self.beacon is not None:
            return self.beacon.is_early_release(ev.round, ev.signature, self.height)
        return False

    # -- application-stage rulings -------------------------------------------------------
    def rule_noncooperation(self, missing) -> None:
        deltas = self.ledger.burn_all("noncooperation")
        self.halted = True
        self.log.log(self.height, "escrow", "noncooperation", None, deltas, missing=sorted(missing))

    def reveal_slashed_share(self, i: int, x_i: int) -> None:
        """Publish a slashed participant's key share; the system becomes (t-1, n-1)."""
        s = self.suite
        if s.exp(s.generator(self.config.tag), x_i) != self.expected_public(i):
            raise ProtocolError(f"revealed share of {i} does not match its public share")
        self.revealed_shares[i] = x_i
        self.log.log(self.height, "escrow", "share_revealed", s.serialize_scalar(x_i), index=i,
                     effective_threshold=self.effective_threshold)

    @property
    def effective_threshold(self) -> int:
        return self.config.t - len(self.revealed_shares)

    # -- conclusion -----------------------------------------------------------------
    def _conclude(self):
        self.phase = Phase.CONCLUDED
        self.concluded_at = self.height
        self.log.log(self.height, "escrow", "concluded", self.suite.serialize(self.expected_public(None)))

    def conclude(self, key_shares: dict[int, int]) -> DkgResult:
        """Assemble the result once the machine has concluded without complaints."""
        if self.phase != Phase.CONCLUDED:
            raise ProtocolError(f"cannot conclude from phase {self.phase.value}")
        idx = sorted(self.participants)
        return DkgResult(
            secret_shares=dict(key_shares),
            public_key=self.expected_public(None),
            public_shares={j: self.expected_public(j) for j in idx},
            commitments={i: self.participants[i].commitments for i in idx},
            qual=idx,
        )


class EscrowParticipant:
    """A participant whose actions are a function of its secrets, behavior and the public state."""

    def __init__(self, index: int, suite: GroupSuite, config: DkgConfig, behavior=HONEST, seed: int = 0):
        self.index = index
        self.suite = suite
        self.config = config
        self.behavior = parse_behavior(behavior)
        self.poly = participant_polynomial(seed, index, config.t, suite.q)
        self.keys = elgamal_keygen(suite, derive_rng(seed, "elgamal", index))
        self._enc_rng = derive_rng(seed, "enc", index)
        self.received: dict[int, int] = {}
        self.done: set[str] = set()

    def commitments(self) -> CommitmentVector:
        C = commit(self.suite, self.poly, self.config.tag)
        b = self.behavior
        if isinstance(b, NonmemberCommitment):
            els = list(C.elements)
            els[b.k] = self.suite.nonmember(self.config.tag)
            C = CommitmentVector(C.tag, tuple(els))
        elif isinstance(b, BadHashCommit):
            els = list(C.elements)
            els[0] = self.suite.mul(els[0], self.suite.generator(self.config.tag))
            C = CommitmentVector(C.tag, tuple(els))
        return C

    def subshare(self, j: int) -> int:
        x = self.poly(j)
        if isinstance(self.behavior, InconsistentSubshare) and j in self.behavior.recipients:
            x = (x + 1) % self.suite.q
        return x

    def act(self, m: EscrowDkg) -> None:
        """Submit whatever the current phase asks of this participant."""
        b = self.behavior
        withholds = isinstance(b, Withhold)
        if m.phase == Phase.ENROLLMENT and "tx1" not in self.done:
            self.done.add("tx1")
            if not (withholds and b.tx == "tx1"):
                X0 = self.suite.exp(self.suite.generator(self.config.tag), self.poly.secret)
                m.enroll(self.index, self.keys.public, hash_commit(self.suite, X0))
        elif m.phase == Phase.COMMITMENTS and "tx2" not in self.done:
            self.done.add("tx2")
            if self.index in m.participants and not (withholds and b.tx == "tx2"):
                m.publish_commitments(self.index, self.commitments())
        elif m.phase == Phase.SUBSHARES and "tx3" not in self.done:
            self.done.add("tx3")
            if self.index not in m.participants:
                return
            for j in sorted(m.participants):
                if j == self.index or (withholds and b.withholds("tx3", j)):
                    continue
                pk = m.participants[j].enc_pub
                if not self.suite.is_member(pk):
                    continue
                m.publish_subshare(self.index, j, elgamal_encrypt(self.suite, self.subshare(j), pk, self._enc_rng))

    def observe(self, m: EscrowDkg) -> None:
        for (i, j), ct in m.tx3.items():
            if j == self.index and i not in self.received:
                self.received[i] = elgamal_decrypt(self.suite, ct, self.keys.secret)

    def key_share(self) -> int:
        return (self.poly(self.index) + sum(self.received.values())) % self.suite.q

    def public_value(self, m: EscrowDkg) -> GroupElement:
        """g^{x_i} as this participant would publish it."""
        s = self.suite
        x = self.key_share()
        if isinstance(self.behavior, BadPublicData):
            x = (x + 1) % s.q
        return s.exp(s.generator(self.config.tag), x)

    # -- complaint policy -------------------------------------------------------------
    def detect(self, m: EscrowDkg) -> list[Complaint]:
        """Every justified complaint this participant could file right now."""
        s = self.suite
        found: list[Complaint] = []
        me = self.index
        for i in sorted(m.participants):
            if i == me:
                continue
            rec = m.participants[i]
            C = rec.commitments
            if m.phase_elapsed(Phase.ENROLLMENT) and not s.is_member(rec.enc_pub):
                found.append(Complaint("cm2", me, i))
            elif C is not None and (len(C) != self.config.t + 1
                                    or not all(s.is_member(X) for X in C.elements)
                                    or hash_commit(s, C[0]) != rec.hash_commitment):
                found.append(Complaint("cm2", me, i))
            elif C is None and m.phase_elapsed(Phase.COMMITMENTS):
                found.append(Complaint("cm1", me, i))
        if m.phase_elapsed(Phase.SUBSHARES):
            for i in sorted(m.participants):
                for j in sorted(m.participants):
                    if i != j and (i, j) not in m.tx3:
                        found.append(Complaint("cm3", me, i, recipient=j))
        if m.phase in (Phase.SUBSHARES, Phase.VERIFICATION):
            for i, x in sorted(self.received.items()):
                C = m.participants[i].commitments
                if C is not None and not verify_subshare(s, me, x, C):
                    found.append(Complaint("cm4", me, i, recipient=me, xi=self.keys.secret))
        if m.phase == Phase.CONCLUDED:
            for k, pub in enumerate(m.tx_pub):
                if isinstance(pub.sender, int) and pub.value != m.expected_public(pub.about):
                    if not any(r.kind == "cm5" and r.accused == pub.sender for r in m.rulings):
                        found.append(Complaint("cm5", me, pub.sender, pub_index=k))
        return [c for c in found if m.complaint_legal(c)]

    def choose_complaint(self, m: EscrowDkg) -> Complaint | None:
        b = self.behavior
        if isinstance(b, UnjustComplainer) and "unjust" not in self.done:
            c = self._scripted_complaint(m, b)
            if c is not None and m.complaint_legal(c):
                self.done.add("unjust")
                return c
        if not b.complains or m.ledger.deposits.get(self.index, 0) <= 0:
            return None
        found = self.detect(m)
        return found[0] if found else None

    def _scripted_complaint(self, m, b: UnjustComplainer) -> Complaint | None:
        i = b.target
        if b.complaint == "cm4":
            if (i, self.index) not in m.tx3:
                return None
            return Complaint("cm4", self.index, i, recipient=self.index, xi=self.keys.secret)
        if b.complaint == "cm3":
            others = [j for j in sorted(m.participants) if j not in (i,)]
            return Complaint("cm3", self.index, i, recipient=others[0] if others else None)
        if b.complaint == "cm2" and (i not in m.participants or m.participants[i].commitments is None):
            return None
        if b.complaint == "cm5":
            for k, pub in enumerate(m.tx_pub):
                if pub.sender == i:
                    return Complaint("cm5", self.index, i, pub_index=k)
            return None
        return Complaint(b.complaint, self.index, i)


@dataclass
class DkgRun:
    machine: EscrowDkg
    participants: dict[int, EscrowParticipant]
    result: DkgResult | None

    @property
    def transcript(self) -> Transcript:
        return self.machine.log

    @property
    def ledger(self) -> EscrowLedger:
        return self.machine.ledger


def step_participants(m: EscrowDkg, agents) -> Ruling | None:
    """One block of participant activity: submissions, then at most one complaint."""
    for a in agents:
        if m.terminal:
            break
        a.act(m)
    for a in agents:
        a.observe(m)
    for a in agents:
        if m.phase == Phase.FAILED:
            return None
        c = a.choose_complaint(m)
        if c is not None:
            return m.file_complaint(c)
    return None


def run_escrow_dkg(suite: GroupSuite, config: DkgConfig, behaviors=None, seed: int = 0,
                   transcript=None, refund_on_failure: bool = True) -> DkgRun:
    behaviors = [parse_behavior(b) for b in (behaviors or [HONEST] * config.n)]
    if len(behaviors) != config.n:
        raise ValueError("one behavior per participant required")
    m = EscrowDkg(suite, config, transcript)
    agents = [EscrowParticipant(i, suite, config, behaviors[i - 1], seed) for i in range(1, config.n + 1)]
    m.start()
    while not m.terminal:
        step_participants(m, agents)
        if m.terminal:
            break
        m.advance_block()
    result = None
    if m.phase == Phase.CONCLUDED:
        shares = {a.index: a.key_share() for a in agents}
        for a in agents:
            m.participants[a.index].secret_share = shares[a.index]
        result = m.conclude(shares)
    elif refund_on_failure and m.failure != "enrollment incomplete":
        deltas = m.ledger.refund_all("refund:relaunch")
        m.log.log(m.height, "escrow", "settled", None, deltas)
    return DkgRun(m, {a.index: a for a in agents}, result)
