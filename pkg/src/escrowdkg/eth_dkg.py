"""Eth-DKG: on-chain enrollment only, commitments and sub-shares off-chain.

Dealers commit over both G1 and G2 and bind the pair vector with a digest in
their enrollment. Recipients verify sub-shares against the G1 half; the public
key is the G2 product. Undelivered messages trigger an on-chain alert that
the dealer must answer within the fallback deadline.

Off-chain messages carry the dealer's signature (``SignatureRegistry``) so a
recipient can prove what it was sent.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .behaviors import (
    HONEST,
    DigestMismatch,
    InconsistentDualPair,
    InconsistentSubshare,
    NonmemberCommitment,
    UnjustComplainer,
    Withhold,
    parse_behavior,
)
from .dispute_game import (
    SignatureRegistry,
    Signed,
    encode_commitments,
    encode_subshare,
    run_dispute,
)
from .escrow_dkg import DkgConfig, DkgResult, Phase, ProtocolError
from .escrow_ledger import EscrowLedger, Ruling, make_ruling
from .group_suite import G1, G2, GroupElement, GroupSuite, digest
from .secret_sharing import (
    CommitmentVector,
    ElGamalCiphertext,
    commit,
    elgamal_decrypt,
    elgamal_encrypt,
    elgamal_keygen,
    public_share,
    verify_subshare,
)
from .seeding import derive_rng, participant_polynomial
from .transcript import Transcript, entity_name

# Eth complaint -> the escrow incentive row it is settled under
INCENTIVE_ROW = {"cm1'": "cm2", "cm2'": "cm2", "cm3'": "cm4"}


def check_g1g2_consistency(suite: GroupSuite, x1: GroupElement, x2: GroupElement) -> bool:
    """e(g1, x2) == e(x1, g2); non-members are never consistent."""
    if x1.tag != G1 or x2.tag != G2 or not (suite.is_member(x1) and suite.is_member(x2)):
        return False
    return suite.pairing(suite.g1, x2) == suite.pairing(x1, suite.g2)


@dataclass(frozen=True)
class DualCommitmentVector:
    c1: CommitmentVector
    c2: CommitmentVector

    def __post_init__(self):
        if len(self.c1) != len(self.c2):
            raise ValueError("dual commitment halves differ in length")

    def __len__(self):
        return len(self.c1)


def dual_commit(suite: GroupSuite, f) -> DualCommitmentVector:
    return DualCommitmentVector(commit(suite, f, G1), commit(suite, f, G2))


def encode_dual(suite: GroupSuite, D: DualCommitmentVector) -> bytes:
    return encode_commitments(suite, D.c1) + encode_commitments(suite, D.c2)


def commitment_digest(suite: GroupSuite, D: DualCommitmentVector) -> bytes:
    return digest(encode_dual(suite, D))


def inconsistent_index(suite: GroupSuite, D: DualCommitmentVector) -> int | None:
    for k, (x1, x2) in enumerate(zip(D.c1.elements, D.c2.elements)):
        if not check_g1g2_consistency(suite, x1, x2):
            return k
    return None


@dataclass
class EthRecord:
    index: int
    enc_pub: GroupElement
    dig: bytes
    onchain_tx2: DualCommitmentVector | None = None
    onchain_tx3: dict[int, ElGamalCiphertext] = field(default_factory=dict)


@dataclass
class Alert:
    requester: int
    dealer: int
    kind: int  # 2 public commitments, 3 private sub-share
    deadline: int
    answered: bool = False


@dataclass(frozen=True)
class EthComplaint:
    kind: str  # "cm1'", "cm2'", "cm3'", "cm4'"
    prover: int
    accused: int
    evidence: Signed | None = None  # signed tx2' (cm1', cm2') or tx3' (cm3')
    k0: int | None = None
    dual: DualCommitmentVector | None = None
    subshare: Signed | None = None
    xi: int | None = None  # cm3' over an on-chain sub-share
    missing: int | None = None  # cm4': which data kind


class OffchainChannel:
    """Loss-free message set unless a drop is scripted for (kind, sender, recipient)."""

    def __init__(self, drops=()):
        self.drops = {tuple(d) for d in drops}
        self.inbox: dict[tuple[int, int, int], object] = {}

    def send(self, kind: int, sender: int, recipient: int, msg) -> bool:
        if (kind, sender, recipient) in self.drops:
            return False
        self.inbox[(kind, sender, recipient)] = msg
        return True

    def get(self, kind: int, sender: int, recipient: int):
        return self.inbox.get((kind, sender, recipient))


class EthDkg:
    def __init__(self, suite: GroupSuite, config: DkgConfig, registry: SignatureRegistry, transcript=None):
        self.suite = suite
        self.config = config
        self.registry = registry
        self.log = transcript if transcript is not None else Transcript()
        self.ledger = EscrowLedger()
        self.phase = Phase.ENROLLMENT
        self.height = 0
        self.phase_start = 0
        self.records: dict[int, EthRecord] = {}
        self.alerts: list[Alert] = []
        self.rulings: list[Ruling] = []
        self.failure: str | None = None
        self.onchain_writes = 0
        self.disputes = []
        self.log.log(0, "escrow", "deployed", None, protocol="eth_dkg", **suite.describe(),
                     n=config.n, t=config.t, deposit=config.deposit, epoch=config.epoch)

    @property
    def terminal(self):
        return self.phase in (Phase.CONCLUDED, Phase.FAILED)

    def _write(self, sender, event, payload=None, deltas=(), **data):
        self.onchain_writes += 1
        self.log.log(self.height, sender, event, payload, deltas, **data)

    def enroll(self, i: int, enc_pub: GroupElement, dig: bytes):
        if self.phase != Phase.ENROLLMENT:
            raise ProtocolError("enrollment is closed")
        if i in self.records:
            raise ProtocolError(f"participant {i} already enrolled")
        deltas = self.ledger.deposit(i, self.config.deposit)
        self.records[i] = EthRecord(i, enc_pub, dig)
        self._write(i, "tx1", self.suite.serialize(enc_pub) + dig, deltas, digest=dig.hex())

    def advance_block(self):
        if self.terminal:
            raise ProtocolError("protocol is in a terminal state")
        self.height += 1
        if self.phase == Phase.ENROLLMENT:
            if len(self.records) == self.config.n:
                self._enter(Phase.COMMITMENTS)
            elif self.height >= self.phase_start + self.config.epoch:
                self.phase = Phase.FAILED
                self.failure = "enrollment incomplete"
                self.log.log(self.height, "escrow", "aborted", None, self.ledger.refund_all("refund:abort"))
            return
        if self.height < self.phase_start + self.config.epoch:
            return
        if self.phase == Phase.COMMITMENTS:
            self._enter(Phase.SUBSHARES)
        elif self.phase == Phase.SUBSHARES:
            self._enter(Phase.VERIFICATION)
        elif self.phase == Phase.VERIFICATION:
            open_alerts = [a for a in self.alerts if not a.answered]
            if not open_alerts:
                self.phase = Phase.CONCLUDED
                self.log.log(self.height, "escrow", "concluded", None)
            elif all(self.height > a.deadline + self.config.epoch for a in open_alerts):
                # nobody complained about the missing data in time
                self.phase = Phase.FAILED
                self.failure = "missing data unresolved"
                self.log.log(self.height, "escrow", "failed", None, reason=self.failure)

    def _enter(self, phase):
        self.phase = phase
        self.phase_start = self.height
        self.log.log(self.height, "escrow", "phase", None, phase=phase.value)

    # -- missing data ----------------------------------------------------------------
    def alert(self, requester: int, dealer: int, kind: int) -> Alert | None:
        """Request on-chain delivery. Re-alerting for data already on chain is a logged no-op."""
        if kind not in (2, 3):
            raise ValueError("kind must be 2 (commitments) or 3 (sub-share)")
        rec = self.records[dealer]
        on_chain = rec.onchain_tx2 is not None if kind == 2 else requester in rec.onchain_tx3
        pending = any(a.requester == requester and a.dealer == dealer and a.kind == kind for a in self.alerts)
        if on_chain or pending:
            self._write(requester, "alert_noop", None, dealer=dealer, kind=kind)
            return None
        a = Alert(requester, dealer, kind, self.height + self.config.epoch)
        self.alerts.append(a)
        self._write(requester, "alert", None, dealer=dealer, kind=kind, deadline=a.deadline)
        return a

    def answer_alert(self, a: Alert, data):
        if self.height > a.deadline:
            raise ProtocolError("alert deadline passed")
        rec = self.records[a.dealer]
        if a.kind == 2:
            rec.onchain_tx2 = data
            self._write(a.dealer, "tx2_onchain", encode_dual(self.suite, data))
        else:
            rec.onchain_tx3[a.requester] = data
            self._write(a.dealer, "tx3_onchain", self.suite.serialize(data.c1), recipient=a.requester)
        a.answered = True

    def expired_alerts(self) -> list[Alert]:
        return [a for a in self.alerts if not a.answered and self.height > a.deadline]

    # -- complaints ------------------------------------------------------------------
    def live_participants(self):
        return sorted(i for i in self.records if self.ledger.deposits.get(i, 0) > 0)

    def file_complaint(self, c: EthComplaint) -> Ruling:
        if self.terminal:
            raise ProtocolError("protocol is in a terminal state")
        self._write(c.prover, "complaint", None, kind=c.kind, prover=entity_name(c.prover), accused=c.accused)
        justified = self._verdict(c)
        row = INCENTIVE_ROW.get(c.kind) or ("cm1" if c.missing == 2 else "cm3")
        ruling = make_ruling(row, justified, c.prover, c.accused, self.live_participants(),
                               self.config.t, self.config.deposit, label=c.kind)
        deltas = self.ledger.apply_ruling(ruling)
        self.rulings.append(ruling)
        self.log.log(self.height, "escrow", "ruling", None, deltas, **ruling.to_dict())
        self.phase = Phase.FAILED
        self.failure = f"{c.kind} against {entity_name(c.accused)}"
        self.log.log(self.height, "escrow", "failed", None, reason=self.failure)
        return ruling

    def _attested_dual(self, c: EthComplaint) -> bool:
        """The complained-about commitments provably came from the accused."""
        if c.dual is None:
            return False
        if c.evidence is None:
            return self.records[c.accused].onchain_tx2 == c.dual
        return self.registry.verify(c.evidence, c.accused) and c.evidence.body == encode_dual(self.suite, c.dual)

    def _verdict(self, c: EthComplaint) -> bool:
        s = self.suite
        rec = self.records.get(c.accused)
        if rec is None:
            return False
        if c.kind == "cm1'":
            return self._attested_dual(c) and commitment_digest(s, c.dual) != rec.dig
        if c.kind == "cm2'":
            if not self._attested_dual(c) or c.k0 is None or not 0 <= c.k0 < len(c.dual):
                return False
            return not check_g1g2_consistency(s, c.dual.c1[c.k0], c.dual.c2[c.k0])
        if c.kind == "cm3'":
            if not self._attested_dual(c) or commitment_digest(s, c.dual) != rec.dig:
                return False
            sub = c.subshare
            if sub is None:
                ct = rec.onchain_tx3.get(c.prover)
                prover_rec = self.records.get(c.prover)
                if ct is None or c.xi is None or s.exp(s.g1, c.xi) != prover_rec.enc_pub:
                    return False
                # on-chain data is attributable to its sender
                x = elgamal_decrypt(s, ct, c.xi)
                sub = self.registry.sign(c.accused, encode_subshare(s, c.prover, x))
            x = int.from_bytes(sub.body[4:], "big") % s.q
            C1 = c.dual.c1
            signed_c1 = self.registry.sign(c.accused, encode_commitments(s, C1)) if self._attested_dual(c) else None
            outcome, game = run_dispute(s, signed_c1, sub, C1, c.prover, x, self.registry, c.accused)
            self.disputes.append(game)
            for turn in game.turns:
                self.log.log(self.height, turn["party"], "dispute_turn", None, **turn)
            return outcome.just
        if c.kind == "cm4'":
            return any(a.dealer == c.accused and a.kind == c.missing for a in self.expired_alerts())
        return False


class EthParticipant:
    def __init__(self, index, suite: GroupSuite, config: DkgConfig, registry, behavior=HONEST, seed=0):
        self.index = index
        self.suite = suite
        self.config = config
        self.registry = registry
        self.behavior = parse_behavior(behavior)
        self.poly = participant_polynomial(seed, index, config.t, suite.q)
        self.keys = elgamal_keygen(suite, derive_rng(seed, "elgamal", index))
        self._enc_rng = derive_rng(seed, "enc", index)
        self.dual = self._dual()
        self.got_tx2: dict[int, tuple[DualCommitmentVector, Signed | None]] = {}
        self.got_tx3: dict[int, Signed] = {}
        self.done: set = set()

    def _dual(self) -> DualCommitmentVector:
        s, b = self.suite, self.behavior
        D = dual_commit(s, self.poly)
        if isinstance(b, InconsistentDualPair):
            els = list(D.c2.elements)
            els[b.k0] = s.mul(els[b.k0], s.g2)
            D = DualCommitmentVector(D.c1, CommitmentVector(G2, tuple(els)))
        elif isinstance(b, NonmemberCommitment):
            els = list(D.c1.elements)
            els[b.k] = s.nonmember(G1)
            D = DualCommitmentVector(CommitmentVector(G1, tuple(els)), D.c2)
        return D

    def dual_for(self, j: int) -> DualCommitmentVector:
        b = self.behavior
        if isinstance(b, DigestMismatch) and b.recipient == j:
            s = self.suite
            c1 = list(self.dual.c1.elements)
            c2 = list(self.dual.c2.elements)
            c1[0], c2[0] = s.mul(c1[0], s.g1), s.mul(c2[0], s.g2)
            return DualCommitmentVector(CommitmentVector(G1, tuple(c1)), CommitmentVector(G2, tuple(c2)))
        return self.dual

    def subshare(self, j: int) -> int:
        x = self.poly(j)
        if isinstance(self.behavior, InconsistentSubshare) and j in self.behavior.recipients:
            x = (x + 1) % self.suite.q
        return x

    def _withholds(self, tx, j):
        b = self.behavior
        return isinstance(b, Withhold) and b.withholds(tx, j)

    def act(self, m: EthDkg, channel: OffchainChannel):
        s = self.suite
        if m.phase == Phase.ENROLLMENT and "tx1" not in self.done:
            self.done.add("tx1")
            if not self._withholds("tx1", None):
                m.enroll(self.index, self.keys.public, commitment_digest(s, self.dual))
        elif m.phase == Phase.COMMITMENTS and "tx2" not in self.done:
            self.done.add("tx2")
            for j in sorted(m.records):
                if j != self.index and not self._withholds("tx2", j):
                    D = self.dual_for(j)
                    if channel.send(2, self.index, j, (D, self.registry.sign(self.index, encode_dual(s, D)))):
                        m.log.log(m.height, self.index, "offchain_tx2", encode_dual(s, D), recipient=j)
        elif m.phase == Phase.SUBSHARES and "tx3" not in self.done:
            self.done.add("tx3")
            for j in sorted(m.records):
                if j != self.index and not self._withholds("tx3", j):
                    body = encode_subshare(s, j, self.subshare(j))
                    if channel.send(3, self.index, j, self.registry.sign(self.index, body)):
                        m.log.log(m.height, self.index, "offchain_tx3", None, recipient=j)
        # answer alerts addressed to us
        for a in m.alerts:
            if a.dealer != self.index or a.answered or m.height > a.deadline:
                continue
            b = self.behavior
            if isinstance(b, Withhold) and not b.respond_on_alert and b.withholds(f"tx{a.kind}", a.requester):
                continue
            if a.kind == 2:
                m.answer_alert(a, self.dual_for(a.requester))
            else:
                pk = m.records[a.requester].enc_pub
                m.answer_alert(a, elgamal_encrypt(s, self.subshare(a.requester), pk, self._enc_rng))

    def observe(self, m: EthDkg, channel: OffchainChannel):
        s = self.suite
        for i in sorted(m.records):
            if i == self.index:
                continue
            msg = channel.get(2, i, self.index)
            if msg is not None:
                self.got_tx2.setdefault(i, msg)
            elif m.records[i].onchain_tx2 is not None and i not in self.got_tx2:
                self.got_tx2[i] = (m.records[i].onchain_tx2, None)
            msg = channel.get(3, i, self.index)
            if msg is not None:
                self.got_tx3.setdefault(i, msg)
            elif self.index in m.records[i].onchain_tx3 and i not in self.got_tx3:
                x = elgamal_decrypt(s, m.records[i].onchain_tx3[self.index], self.keys.secret)
                self.got_tx3[i] = Signed(i, encode_subshare(s, self.index, x), b"")

    def received_share(self, i: int) -> int:
        return int.from_bytes(self.got_tx3[i].body[4:], "big")

    def _cm3(self, i: int) -> EthComplaint:
        D, ev = self.got_tx2[i]
        sub = self.got_tx3[i]
        if sub.tag == b"":  # arrived on chain: prove it by revealing the decryption key
            return EthComplaint("cm3'", self.index, i, ev, dual=D, xi=self.keys.secret)
        return EthComplaint("cm3'", self.index, i, ev, dual=D, subshare=sub)

    def next_move(self, m: EthDkg):
        """An alert or complaint to submit now, if any (complaints take priority)."""
        s, me = self.suite, self.index
        b = self.behavior
        if isinstance(b, UnjustComplainer) and "unjust" not in self.done and m.phase == Phase.VERIFICATION:
            if b.target in self.got_tx2 and b.target in self.got_tx3:
                self.done.add("unjust")
                return self._cm3(b.target)
        if not b.complains or m.ledger.deposits.get(me, 0) <= 0:
            return None
        for a in m.expired_alerts():
            return EthComplaint("cm4'", me, a.dealer, missing=a.kind)
        for i in sorted(self.got_tx2):
            D, ev = self.got_tx2[i]
            if commitment_digest(s, D) != m.records[i].dig:
                return EthComplaint("cm1'", me, i, ev, dual=D)
            k0 = inconsistent_index(s, D)
            if k0 is not None:
                return EthComplaint("cm2'", me, i, ev, k0=k0, dual=D)
        if m.phase == Phase.VERIFICATION:
            for i in sorted(self.got_tx3):
                if i in self.got_tx2 and not verify_subshare(s, me, self.received_share(i), self.got_tx2[i][0].c1):
                    return self._cm3(i)
        # missing data: ask once the sending phase is over
        for i in sorted(m.records):
            if i == me:
                continue
            if m.phase in (Phase.SUBSHARES, Phase.VERIFICATION) and i not in self.got_tx2 and ("alert", 2, i) not in self.done:
                self.done.add(("alert", 2, i))
                return ("alert", i, 2)
            if m.phase == Phase.VERIFICATION and i not in self.got_tx3 and ("alert", 3, i) not in self.done:
                self.done.add(("alert", 3, i))
                return ("alert", i, 3)
        return None

    def key_share(self) -> int:
        return (self.poly(self.index) + sum(self.received_share(i) for i in self.got_tx3)) % self.suite.q


@dataclass
class EthRun:
    machine: EthDkg
    participants: dict[int, EthParticipant]
    result: DkgResult | None
    channel: OffchainChannel

    @property
    def transcript(self):
        return self.machine.log

    @property
    def ledger(self):
        return self.machine.ledger


def run_eth_dkg(suite: GroupSuite, config: DkgConfig, behaviors=None, seed: int = 0, drops=(),
                transcript=None, refund_on_failure: bool = True) -> EthRun:
    behaviors = [parse_behavior(b) for b in (behaviors or [HONEST] * config.n)]
    if len(behaviors) != config.n:
        raise ValueError("one behavior per participant required")
    registry = SignatureRegistry(seed)
    m = EthDkg(suite, config, registry, transcript)
    channel = OffchainChannel(drops)
    agents = [EthParticipant(i, suite, config, registry, behaviors[i - 1], seed) for i in range(1, config.n + 1)]
    while not m.terminal:
        for a in agents:
            a.act(m, channel)
        for a in agents:
            a.observe(m, channel)
        for a in agents:
            move = a.next_move(m)
            if isinstance(move, EthComplaint):
                m.file_complaint(move)
                break
            if move is not None:
                m.alert(a.index, move[1], move[2])
        if m.terminal:
            break
        m.advance_block()
    result = None
    if m.phase == Phase.CONCLUDED:
        idx = sorted(m.records)
        duals = {i: agents[i - 1].dual for i in idx}
        c2 = [duals[i].c2 for i in idx]
        result = DkgResult(
            secret_shares={a.index: a.key_share() for a in agents},
            public_key=suite.product((D[0] for D in c2), G2),
            public_shares={j: public_share(suite, c2, j) for j in idx},
            commitments={i: duals[i].c2 for i in idx},
            qual=idx,
        )
        m.log.summary = {"protocol": "eth_dkg", "outcome": "concluded",
                         "public_key": suite.serialize(result.public_key).hex(),
                         "onchain_writes": m.onchain_writes}
    elif refund_on_failure and m.failure != "enrollment incomplete":
        m.log.log(m.height, "escrow", "settled", None, m.ledger.refund_all("refund:relaunch"))
    return EthRun(m, {a.index: a for a in agents}, result, channel)
