"""Reference Ped-DKG with QUAL complaint logic; the correctness oracle for Escrow-DKG.

Broadcast is an ordered, loss-free event log. Private channels are modeled
directly. A dealer that answers a complaint with a share failing the
commitment check, or that leaves a demanded share unrevealed, is disqualified.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .behaviors import (
    HONEST,
    InconsistentSubshare,
    NonmemberCommitment,
    UnjustComplainer,
    Withhold,
    parse_behavior,
)
from .group_suite import G2, GroupElement, GroupSuite
from .secret_sharing import CommitmentVector, commit, public_share, verify_subshare
from .seeding import participant_polynomial
from .transcript import Transcript


@dataclass
class PedDkgOutcome:
    qual: set[int]
    secret_shares: dict[int, int]
    public_key: GroupElement
    public_shares: dict[int, GroupElement]
    disqualified: dict[int, str] = field(default_factory=dict)


def run_ped_dkg(suite: GroupSuite, n: int, t: int, behaviors=None, seed: int = 0, tag: str = G2):
    if t < 1 or n < t + 1:
        raise ValueError(f"need 1 <= t < n, got t={t}, n={n}")
    behaviors = [parse_behavior(b) for b in (behaviors or [HONEST] * n)]
    if len(behaviors) != n:
        raise ValueError("one behavior per participant required")
    q = suite.q
    log = Transcript()
    height = 0
    polys = {i: participant_polynomial(seed, i, t, q) for i in range(1, n + 1)}

    # 1. broadcast commitments, send sub-shares privately
    commitments: dict[int, CommitmentVector] = {}
    for i in range(1, n + 1):
        b = behaviors[i - 1]
        if isinstance(b, Withhold) and b.tx == "tx2":
            log.log(height, i, "ped_commitments_missing")
            continue
        C = commit(suite, polys[i], tag)
        if isinstance(b, NonmemberCommitment):
            bad = list(C.elements)
            bad[b.k] = suite.nonmember(tag)
            C = CommitmentVector(tag, tuple(bad))
        commitments[i] = C
        log.log(height, i, "ped_commitments", b"".join(_safe_ser(suite, X) for X in C.elements))

    received: dict[tuple[int, int], int] = {}
    for i in range(1, n + 1):
        b = behaviors[i - 1]
        for j in range(1, n + 1):
            if isinstance(b, Withhold) and b.withholds("tx3", j) and j != i:
                continue
            x = polys[i](j)
            if isinstance(b, InconsistentSubshare) and j in b.recipients:
                x = (x + 1) % q
            received[(i, j)] = x

    # 2. verification and complaints
    height += 1
    complaints: dict[int, list[int]] = {i: [] for i in range(1, n + 1)}
    for j in range(1, n + 1):
        bj = behaviors[j - 1]
        for i in range(1, n + 1):
            if i == j:
                continue
            ok = i in commitments and (i, j) in received and verify_subshare(
                suite, j, received[(i, j)], commitments[i])
            if not ok and bj.complains:
                complaints[i].append(j)
                log.log(height, j, "ped_complaint", accused=i)
        if isinstance(bj, UnjustComplainer) and j not in complaints[bj.target]:
            complaints[bj.target].append(j)
            log.log(height, j, "ped_complaint", accused=bj.target)

    # 3. reveals and disqualification
    height += 1
    disqualified: dict[int, str] = {}
    for i in range(1, n + 1):
        if i not in commitments:
            disqualified[i] = "no commitments"
            continue
        if len(complaints[i]) > t:
            disqualified[i] = "more than t complaints"
            continue
        b = behaviors[i - 1]
        for j in complaints[i]:
            if isinstance(b, Withhold) and b.tx == "tx3" and not b.respond_on_alert and (b.target in (None, j)):
                disqualified[i] = f"did not reveal share for {j}"
                break
            x = polys[i](j)
            if isinstance(b, InconsistentSubshare) and j in b.recipients and not b.reveal_on_complaint:
                x = (x + 1) % q
            log.log(height, i, "ped_reveal", suite.serialize_scalar(x), recipient=j)
            if not verify_subshare(suite, j, x, commitments[i]):
                disqualified[i] = f"revealed share for {j} fails check"
                break
            received[(i, j)] = x
    for i, why in disqualified.items():
        log.log(height, "broadcast", "ped_disqualified", accused=i, reason=why)

    qual = {i for i in range(1, n + 1) if i not in disqualified}
    shares = {j: sum(received.get((i, j), 0) for i in qual) % q for j in range(1, n + 1)}
    public_key = suite.product((commitments[i][0] for i in sorted(qual)), tag)
    pub_shares = {j: public_share(suite, [commitments[i] for i in sorted(qual)], j) for j in range(1, n + 1)}
    log.summary = {"protocol": "ped_dkg", "qual": sorted(qual),
                   "public_key": suite.serialize(public_key).hex()}
    return PedDkgOutcome(qual, shares, public_key, pub_shares, disqualified), log


def _safe_ser(suite, X):
    try:
        return suite.serialize(X)
    except Exception:
        return repr(X).encode()
