"""Interactive sub-share dispute: a bisection search over commitment prefix products.

Prover j claims dealer i's sub-share x fails ``g^x = prod_k X_k^{j^k}``.
The challenger i submits prefix products zeta(m); the prover agrees or
disagrees; the search narrows (l, h) until h = l + 1 and the arbiter checks a
single step with at most two exponentiations.

Signatures are modeled by ``SignatureRegistry``: an HMAC under a per-party key
the arbiter can check. Forged or unsigned data forfeits the dispute for whoever
submitted it.
"""
from __future__ import annotations

import hashlib
import hmac
import math
from dataclasses import asdict, dataclass
from typing import Callable

from .group_suite import GroupElement, GroupSuite
from .secret_sharing import CommitmentVector

CHALLENGER = "challenger"
PROVER = "prover"
ARBITER = "arbiter"


@dataclass
class CostCounters:
    onchain_writes: int = 0
    scalar_ops: int = 0
    group_exps: int = 0
    group_muls: int = 0
    hash_evals: int = 0
    rounds: int = 0

    def __add__(self, other: CostCounters) -> CostCounters:
        return CostCounters(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def weighted(self, weights: dict | None = None) -> int:
        w = weights or DEFAULT_WEIGHTS
        return sum(v * w.get(k, 1) for k, v in asdict(self).items())

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_WEIGHTS = {k: 1 for k in CostCounters.__dataclass_fields__}

# rough EVM-style relative prices: storage and exponentiation dominate
EVM_WEIGHTS = {
    "onchain_writes": 20000,
    "scalar_ops": 5,
    "group_exps": 40000,
    "group_muls": 500,
    "hash_evals": 36,
    "rounds": 21000,
}

WEIGHT_PROFILES = {"unit": DEFAULT_WEIGHTS, "evm": EVM_WEIGHTS}

# plotted reference gas points (t, gas)
REFERENCE_INTERACTIVE_PROVER = (
    (5, 328532), (20, 407624), (50, 447170), (100, 486716),
    (500, 565808), (1000, 605354), (10000, 763538), (100000, 842630),
)
REFERENCE_INTERACTIVE_CHALLENGER = (
    (5, 139575), (20, 212625), (50, 249150), (100, 285675),
    (500, 358725), (1000, 395250), (10000, 541350), (100000, 614400),
)
REFERENCE_NAIVE_PROVER = ((1, 237232), (5, 451782), (10, 719973), (15, 988170))


class SignatureRegistry:
    """Per-party MAC keys standing in for signatures; the arbiter can verify any tag."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _key(self, party) -> bytes:
        return hashlib.sha256(f"sig|{self.seed}|{party}".encode()).digest()

    def sign(self, party, body: bytes) -> Signed:
        return Signed(party, body, hmac.new(self._key(party), body, hashlib.sha256).digest())

    def verify(self, msg: Signed, party) -> bool:
        if msg is None or msg.signer != party:
            return False
        good = hmac.new(self._key(party), msg.body, hashlib.sha256).digest()
        return hmac.compare_digest(good, msg.tag)


@dataclass(frozen=True)
class Signed:
    signer: object
    body: bytes
    tag: bytes


def encode_commitments(suite: GroupSuite, C: CommitmentVector) -> bytes:
    return b"".join(suite.serialize(X) for X in C.elements)


def encode_subshare(suite: GroupSuite, j: int, x: int) -> bytes:
    return j.to_bytes(4, "big") + suite.serialize_scalar(x)


def zeta(suite: GroupSuite, C: CommitmentVector, j: int, m: int) -> GroupElement:
    """Prefix product prod_{k=0..m} X_k^{j^k}."""
    if not 0 <= m < len(C):
        raise ValueError(f"m={m} outside [0, {len(C) - 1}]")
    acc = suite.identity(C.tag)
    for k in range(m + 1):
        acc = suite.mul(acc, suite.exp(C[k], pow(j, k, suite.q)))
    return acc


def zeta_all(suite: GroupSuite, C: CommitmentVector, j: int) -> list[GroupElement]:
    out, acc, power = [], suite.identity(C.tag), 1
    for X in C.elements:
        acc = suite.mul(acc, suite.exp(X, power))
        out.append(acc)
        power = power * j % suite.q
    return out


def max_rounds(t: int) -> int:
    return math.ceil(math.log2(t + 2))


@dataclass
class DisputeOutcome:
    just: bool  # True: the prover's complaint stands, the dealer loses
    reason: str  # "3a", "3b", "3c", "forfeit:<party>"
    rounds: int
    loser: str

    def to_dict(self) -> dict:
        return asdict(self)


class DisputeGame:
    """Step-wise dispute state; cheap to copy so strategies can be enumerated."""

    __slots__ = ("suite", "C", "j", "x", "t", "l", "h", "last", "highest_agree",
                 "lowest_disagree", "round", "costs", "turns", "outcome", "pending", "record")

    def __init__(self, suite: GroupSuite, C: CommitmentVector, j: int, x: int):
        self.suite = suite
        self.C = C
        self.j = j
        self.x = x
        self.t = len(C) - 1
        self.l = -1
        self.h = self.t + 1
        self.last = None
        self.highest_agree = None
        self.lowest_disagree = None
        self.round = 0
        self.costs = {CHALLENGER: CostCounters(), PROVER: CostCounters(), ARBITER: CostCounters()}
        self.turns: list[dict] = []
        self.outcome: DisputeOutcome | None = None
        self.pending: int | None = None
        self.record = True

    def copy(self) -> DisputeGame:
        """Untracked copy (no costs or turn log) for strategy enumeration."""
        g = DisputeGame.__new__(DisputeGame)
        for name in DisputeGame.__slots__:
            setattr(g, name, getattr(self, name))
        g.record = False
        return g

    @property
    def searching(self) -> bool:
        return self.outcome is None and self.h - self.l > 1

    @property
    def next_m(self) -> int:
        return self.l + -(-(self.h - self.l) // 2)

    def challenger_submit(self, value: GroupElement | None):
        m = self.next_m
        self.round += 1
        if value is None:
            return self._forfeit(CHALLENGER)
        self.pending = m
        self.last = value
        if self.record:
            c = self.costs[CHALLENGER]
            c.onchain_writes += 1
            c.rounds += 1
            self.turns.append({"round": self.round, "party": CHALLENGER, "m": m, "submission": _hex(self.suite, value)})

    def prover_respond(self, agree: bool | None):
        if agree is None:
            return self._forfeit(PROVER)
        m = self.pending
        if agree:
            self.l, self.highest_agree = m, self.last
        else:
            self.h, self.lowest_disagree = m, self.last
        self.pending = None
        if self.record:
            c = self.costs[PROVER]
            c.onchain_writes += 1
            c.rounds += 1
            self.turns.append({"round": self.round, "party": PROVER, "m": m,
                               "submission": "agree" if agree else "disagree"})

    def _forfeit(self, party: str):
        just = party == CHALLENGER
        self.outcome = DisputeOutcome(just, f"forfeit:{party}", self.round, party)
        if self.record:
            self.turns.append({"round": self.round, "party": party, "submission": None,
                               "verdict": self.outcome.reason})
        return self.outcome

    def terminal(self, element: GroupElement | None = None, valid: bool = True) -> DisputeOutcome:
        """Run the single-step check. ``element`` is the prover's X_{l+1}; ``valid``
        says whether it carried the dealer's signature."""
        if self.outcome is not None:
            return self.outcome
        s = self.suite
        arb = self.costs[ARBITER] if self.record else CostCounters()
        l, h = self.l, self.h
        if l > -1 and h < self.t + 1:
            X = self.C[l + 1] if element is None else element
            if not valid:
                return self._forfeit(PROVER)
            power = pow(self.j, l + 1, s.q)
            arb.scalar_ops += 1
            lhs = s.mul(self.highest_agree, s.exp(X, power))
            arb.group_exps += 1
            arb.group_muls += 1
            holds, case = lhs == self.lowest_disagree, "3a"
        elif l == -1:
            X = self.C[0] if element is None else element
            if not valid:
                return self._forfeit(PROVER)
            holds, case = self.lowest_disagree == X, "3b"
        else:
            holds, case = self.highest_agree == s.exp(s.generator(self.C.tag), self.x), "3c"
            arb.group_exps += 1
        self.outcome = DisputeOutcome(not holds, case, self.round, PROVER if holds else CHALLENGER)
        if self.record:
            self.costs[PROVER].onchain_writes += 1
            self.turns.append({"round": self.round, "party": ARBITER, "case": case,
                               "verdict": "just" if self.outcome.just else "unjust"})
        return self.outcome

    def cost_total(self) -> CostCounters:
        return self.costs[CHALLENGER] + self.costs[PROVER] + self.costs[ARBITER]


def _hex(suite, value):
    try:
        return suite.serialize(value).hex()
    except Exception:
        return repr(value)


ChallengerStrategy = Callable[[int, DisputeGame], "GroupElement | None"]
ProverStrategy = Callable[[int, "GroupElement", DisputeGame], "bool | None"]


def honest_challenger(suite: GroupSuite, C: CommitmentVector, j: int) -> ChallengerStrategy:
    table = zeta_all(suite, C, j)
    return lambda m, game: table[m]


def honest_prover(suite: GroupSuite, C: CommitmentVector, j: int) -> ProverStrategy:
    table = zeta_all(suite, C, j)
    return lambda m, value, game: value == table[m]


def run_dispute(suite: GroupSuite, signed_commitments: Signed, signed_subshare: Signed,
                C: CommitmentVector, j: int, x: int, registry: SignatureRegistry, dealer,
                challenger: ChallengerStrategy | None = None, prover: ProverStrategy | None = None,
                terminal_element: Signed | None = None) -> tuple[DisputeOutcome, DisputeGame]:
    """Run the whole dispute.

    The prover opens with the dealer-signed commitments and sub-share; both
    must verify against ``dealer`` and match ``C`` / ``(j, x)`` or the prover
    forfeits. ``terminal_element`` lets a prover submit its own signed X_{l+1}.
    """
    game = DisputeGame(suite, C, j, x)
    opening = game.costs[PROVER]
    opening.onchain_writes += 1
    opening.hash_evals += 2
    if not (registry.verify(signed_commitments, dealer) and registry.verify(signed_subshare, dealer)
            and signed_commitments.body == encode_commitments(suite, C)
            and signed_subshare.body == encode_subshare(suite, j, x)):
        return game._forfeit(PROVER), game
    challenger = challenger or honest_challenger(suite, C, j)
    prover = prover or honest_prover(suite, C, j)
    while game.searching:
        m = game.next_m
        if game.challenger_submit(challenger(m, game)) is not None:
            return game.outcome, game
        if game.prover_respond(prover(m, game.last, game)) is not None:
            return game.outcome, game
    element, valid = None, True
    if terminal_element is not None:
        k = game.l + 1 if game.l > -1 else 0
        valid = registry.verify(terminal_element, dealer) and terminal_element.body[:4] == k.to_bytes(4, "big")
        element = _decode_terminal(suite, C, terminal_element)
    return game.terminal(element, valid), game


def sign_commitment_entry(registry: SignatureRegistry, suite, dealer, C: CommitmentVector, k: int, element=None) -> Signed:
    X = C[k] if element is None else element
    return registry.sign(dealer, k.to_bytes(4, "big") + suite.serialize(X))


def _decode_terminal(suite, C, msg: Signed) -> GroupElement | None:
    k = int.from_bytes(msg.body[:4], "big")
    if k < len(C) and suite.serialize(C[k]) == msg.body[4:]:
        return C[k]
    # the element does not appear in the agreed commitments; keep a marker
    return GroupElement(C.tag, ("foreign", msg.body[4:].hex()))


def naive_arbitrate(suite: GroupSuite, C: CommitmentVector, j: int, x: int) -> tuple[bool, CostCounters]:
    """Single-shot check of the full verification equation.

    Returns (just, costs); just means the equation fails. The right side is
    evaluated Horner-style in the exponent (t exponentiations, t
    multiplications) plus one exponentiation for g^x.
    """
    t = len(C) - 1
    costs = CostCounters(onchain_writes=t + 2, hash_evals=2)
    acc = C[t]
    for k in range(t - 1, -1, -1):
        acc = suite.mul(suite.exp(acc, j), C[k])
        costs.group_exps += 1
        costs.group_muls += 1
    lhs = suite.exp(suite.generator(C.tag), x)
    costs.group_exps += 1
    return lhs != acc, costs


def interactive_costs(t: int) -> dict[str, CostCounters]:
    """Counters of the longest dispute at threshold t: the prover disagrees every round."""
    from .group_suite import MockSuite
    from .secret_sharing import Polynomial, commit

    suite = MockSuite(2147483647)
    f = Polynomial(tuple(range(1, t + 2)), suite.q)
    C = commit(suite, f, "G1")
    reg = SignatureRegistry()
    bad = (f(1) + 1) % suite.q
    _, game = run_dispute(suite, reg.sign(0, encode_commitments(suite, C)), reg.sign(0, encode_subshare(suite, 1, bad)),
                          C, 1, bad, reg, 0, prover=lambda m, value, game: False)
    return game.costs


def cost_report(t_values, weights: str | dict = "unit") -> list[dict]:
    from .group_suite import MockSuite
    from .secret_sharing import Polynomial, commit

    w = WEIGHT_PROFILES[weights] if isinstance(weights, str) else weights
    refs = {
        "reference_interactive_prover": dict(REFERENCE_INTERACTIVE_PROVER),
        "reference_interactive_challenger": dict(REFERENCE_INTERACTIVE_CHALLENGER),
        "reference_naive_prover": dict(REFERENCE_NAIVE_PROVER),
    }
    rows = []
    suite = MockSuite(2147483647)
    for t in t_values:
        costs = interactive_costs(t)
        C = commit(suite, Polynomial(tuple(range(1, t + 2)), suite.q), "G1")
        _, naive = naive_arbitrate(suite, C, 1, 0)
        row = {
            "t": t,
            "rounds": costs[PROVER].rounds,
            "round_bound": max_rounds(t),
            "interactive_prover": (costs[PROVER] + costs[ARBITER]).weighted(w),
            "interactive_challenger": costs[CHALLENGER].weighted(w),
            "naive_prover": naive.weighted(w),
            "terminal_group_exps": costs[ARBITER].group_exps,
            "naive_group_exps": naive.group_exps,
        }
        for name, table in refs.items():
            row[name] = table.get(t)
        rows.append(row)
    return rows
