"""Threshold BLS signatures over DKG output and a randomness beacon built on them.

Messages and signatures live in G1, keys in G2. A beacon value RS^r is the
serialized aggregate signature over RS^{r-1}; the message fed to the hash is
those bytes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .group_suite import G1, G2, GroupElement, GroupSuite, digest
from .secret_sharing import lagrange_coefficients

DEFAULT_RS0 = b"escrowdkg beacon genesis"


class InsufficientShares(Exception):
    pass


class EarlyRelease(Exception):
    pass


@dataclass(frozen=True)
class SignatureShare:
    signer: int
    sigma: GroupElement


@dataclass
class Aggregate:
    signature: GroupElement
    signers: tuple[int, ...]
    rejected: tuple[int, ...] = ()


def sign_share(suite: GroupSuite, m: bytes, signer: int, x_i: int) -> SignatureShare:
    return SignatureShare(signer, suite.exp(suite.hash_to_g1(m), x_i))


def verify_share(suite: GroupSuite, m: bytes, share: SignatureShare, pk_i: GroupElement) -> bool:
    return verify_signature(suite, m, share.sigma, pk_i)


def verify_signature(suite: GroupSuite, m: bytes, sigma: GroupElement, pk: GroupElement) -> bool:
    if sigma.tag != G1 or pk.tag != G2 or not suite.is_member(sigma):
        return False
    return suite.pairing(sigma, suite.g2) == suite.pairing(suite.hash_to_g1(m), pk)


verify_aggregate = verify_signature


def aggregate(suite: GroupSuite, shares, m: bytes, t: int, public_shares=None) -> Aggregate:
    """Combine t+1 valid shares with Lagrange coefficients at 0.

    With ``public_shares`` (index -> g2^{x_i}) every share is checked first and
    invalid ones are reported in ``rejected``. The lowest t+1 valid indices are
    used, which is immaterial since the result is unique.
    """
    by_signer: dict[int, SignatureShare] = {}
    rejected = []
    for sh in shares:
        if sh.signer in by_signer:
            continue
        if public_shares is not None and not verify_share(suite, m, sh, public_shares[sh.signer]):
            rejected.append(sh.signer)
            continue
        by_signer[sh.signer] = sh
    if len(by_signer) < t + 1:
        raise InsufficientShares(f"{len(by_signer)} valid shares, need {t + 1}")
    use = sorted(by_signer)[: t + 1]
    lam = lagrange_coefficients(use, 0, suite.q)
    sig = suite.multi_exp([by_signer[i].sigma for i in use], [lam[i] for i in use], G1)
    return Aggregate(sig, tuple(use), tuple(sorted(rejected)))


def elect_leader(rs: bytes, n: int) -> int:
    """1 + digest(RS) mod n (modulo bias accepted)."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1 + int.from_bytes(digest(rs), "big") % n


@dataclass
class BeaconState:
    values: list[bytes] = field(default_factory=lambda: [DEFAULT_RS0])
    start: int = 0  # height at which round 1 may be released
    period: int = 1  # blocks between rounds

    @property
    def round(self) -> int:
        return len(self.values) - 1

    @property
    def current(self) -> bytes:
        return self.values[-1]

    def schedule(self, r: int) -> int:
        return self.start + (r - 1) * self.period


def beacon_next(suite: GroupSuite, state: BeaconState, shares, t: int, height: int, public_shares=None) -> BeaconState:
    r = state.round + 1
    if height < state.schedule(r):
        raise EarlyRelease(f"round {r} due at height {state.schedule(r)}, now {height}")
    agg = aggregate(suite, shares, state.current, t, public_shares)
    return BeaconState(state.values + [suite.serialize(agg.signature)], state.start, state.period)


class Beacon:
    """Beacon bound to a DKG's public key; the escrow consults it for early-release framing."""

    def __init__(self, suite: GroupSuite, public_key: GroupElement, public_shares, t: int,
                 state: BeaconState | None = None):
        self.suite = suite
        self.public_key = public_key
        self.public_shares = public_shares
        self.t = t
        self.state = state or BeaconState()

    def shares_for(self, key_shares: dict[int, int]) -> list[SignatureShare]:
        return [sign_share(self.suite, self.state.current, i, x) for i, x in sorted(key_shares.items())]

    def advance(self, key_shares: dict[int, int], height: int) -> bytes:
        self.state = beacon_next(self.suite, self.state, self.shares_for(key_shares), self.t, height,
                                 self.public_shares)
        return self.state.current

    def is_early_release(self, r: int | None, signature: GroupElement | None, height: int) -> bool:
        """Valid signature on RS^{r-1} shown before round r is due (and before it was released)."""
        if r is None or signature is None or r < 1 or r > self.state.round + 1:
            return False
        if height >= self.state.schedule(r):
            return False
        return verify_signature(self.suite, self.state.values[r - 1], signature, self.public_key)
