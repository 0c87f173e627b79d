"""Prime-order bilinear group arithmetic with two interchangeable backends.

``MockSuite`` is the insecure arithmetic backend: G1 = G2 = GT = (Z_q, +),
both generators are 1, ``exp(b, s) = b*s mod q`` and ``e(a, b) = a*b mod q``.
Discrete logs are readable, which is the whole point: oracles can recompute
every protocol value by hand.

``PairingSuite`` wraps BLS12-381 from ``py_ecc`` (a type-3 pairing).

Both backends implement ``hash_to_g1`` as ``exp(g1, digest(msg) mod q)``.
That exposes the discrete log of every hashed point and is NOT a secure
hash-to-curve; it is deterministic and identical across backends, which is
what the simulator needs.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Any

G1 = "G1"
G2 = "G2"
GT = "GT"
TAGS = (G1, G2, GT)
_TAG_BYTE = {G1: 1, G2: 2, GT: 3}

DIGEST_NAME = "sha256"


def digest(data: bytes) -> bytes:
    """The single 32-byte hash used for every commitment and transcript digest."""
    return hashlib.sha256(data).digest()


class GroupError(Exception):
    pass


class MalformedElement(GroupError):
    pass


class TagMismatch(GroupError):
    pass


@dataclass(frozen=True)
class GroupElement:
    tag: str
    payload: Any

    def __repr__(self) -> str:
        return f"GroupElement({self.tag}, {self.payload!r})"


class GroupSuite:
    backend_id = "abstract"
    q: int

    # -- generators ---------------------------------------------------------
    @property
    def g1(self) -> GroupElement:
        return self.generator(G1)

    @property
    def g2(self) -> GroupElement:
        return self.generator(G2)

    def generator(self, tag: str) -> GroupElement:
        raise NotImplementedError

    def identity(self, tag: str) -> GroupElement:
        raise NotImplementedError

    # -- arithmetic ---------------------------------------------------------
    def exp(self, base: GroupElement, s: int) -> GroupElement:
        raise NotImplementedError

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def inv(self, a: GroupElement) -> GroupElement:
        return self.exp(a, self.q - 1)

    def pairing(self, a: GroupElement, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def is_member(self, x: GroupElement) -> bool:
        raise NotImplementedError

    def product(self, elements, tag: str) -> GroupElement:
        acc = self.identity(tag)
        for e in elements:
            acc = self.mul(acc, e)
        return acc

    def multi_exp(self, bases, scalars, tag: str) -> GroupElement:
        return self.product((self.exp(b, s) for b, s in zip(bases, scalars)), tag)

    # -- hashing / encoding -------------------------------------------------
    def hash_to_scalar(self, msg: bytes) -> int:
        return int.from_bytes(digest(msg), "big") % self.q

    def hash_to_g1(self, msg: bytes) -> GroupElement:
        return self.exp(self.g1, self.hash_to_scalar(msg))

    def random_scalar(self, rng: random.Random) -> int:
        return rng.randrange(self.q)

    @property
    def scalar_width(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def serialize_scalar(self, s: int) -> bytes:
        if not 0 <= s < self.q:
            raise ValueError(f"scalar {s} outside [0, q)")
        return s.to_bytes(self.scalar_width, "big")

    def deserialize_scalar(self, data: bytes) -> int:
        s = int.from_bytes(data, "big")
        if len(data) != self.scalar_width or s >= self.q:
            raise ValueError("malformed scalar encoding")
        return s

    def encode_payload(self, x: GroupElement) -> bytes:
        raise NotImplementedError

    def serialize(self, x: GroupElement) -> bytes:
        """Tag byte, 4-byte big-endian length, backend payload."""
        if x.tag not in _TAG_BYTE:
            raise MalformedElement(f"unknown group tag {x.tag!r}")
        body = self.encode_payload(x)
        return bytes([_TAG_BYTE[x.tag]]) + len(body).to_bytes(4, "big") + body

    def describe(self) -> dict:
        return {"backend": self.backend_id, "q": self.q}

    def _check_tag(self, x: GroupElement, tag: str) -> None:
        if x.tag != tag:
            raise TagMismatch(f"expected {tag}, got {x.tag}")


class MockSuite(GroupSuite):
    """Additive Z_q standing in for all three groups. Insecure by design."""

    backend_id = "mock"

    def __init__(self, q: int = 101):
        if q < 3 or not _is_probable_prime(q):
            raise ValueError(f"q={q} must be an odd prime")
        self.q = q

    def generator(self, tag: str) -> GroupElement:
        return GroupElement(tag, 1)

    def identity(self, tag: str) -> GroupElement:
        return GroupElement(tag, 0)

    def _value(self, x: GroupElement) -> int:
        if x.tag not in TAGS or not isinstance(x.payload, int) or isinstance(x.payload, bool):
            raise MalformedElement(f"bad mock element {x!r}")
        if not 0 <= x.payload < self.q:
            raise MalformedElement(f"payload {x.payload} outside [0, {self.q})")
        return x.payload

    def element(self, tag: str, value: int) -> GroupElement:
        return GroupElement(tag, value % self.q)

    def exp(self, base, s):
        return GroupElement(base.tag, self._value(base) * (s % self.q) % self.q)

    def mul(self, a, b):
        if a.tag != b.tag:
            raise TagMismatch(f"{a.tag} * {b.tag}")
        return GroupElement(a.tag, (self._value(a) + self._value(b)) % self.q)

    def inv(self, a):
        return GroupElement(a.tag, -self._value(a) % self.q)

    def pairing(self, a, b):
        self._check_tag(a, G1)
        self._check_tag(b, G2)
        return GroupElement(GT, self._value(a) * self._value(b) % self.q)

    def is_member(self, x):
        try:
            self._value(x)
        except MalformedElement:
            return False
        return True

    def dlog(self, x: GroupElement) -> int:
        """Discrete log w.r.t. the generator; only possible on this backend."""
        return self._value(x)

    def nonmember(self, tag: str) -> GroupElement:
        return GroupElement(tag, self.q)

    def encode_payload(self, x):
        v = x.payload
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise MalformedElement(f"unencodable mock payload {v!r}")
        # out-of-range payloads stay encodable so transcripts can carry them
        return v.to_bytes(max(self.scalar_width, (v.bit_length() + 7) // 8), "big")


class PairingSuite(GroupSuite):
    """BLS12-381 via ``py_ecc.optimized_bls12_381``.

    Payloads are normalized affine integer coordinates (``None`` for the point
    at infinity) so dataclass equality is canonical.
    """

    backend_id = "pairing"
    curve = "BLS12-381"

    def __init__(self):
        from py_ecc import optimized_bls12_381 as bls

        self._b = bls
        self.q = bls.curve_order
        self._g1 = self._from_point(G1, bls.G1)
        self._g2 = self._from_point(G2, bls.G2)

    def describe(self):
        return {"backend": self.backend_id, "curve": self.curve, "q": self.q}

    # -- conversions ----------------------------------------------------------
    def _from_point(self, tag, pt):
        b = self._b
        if tag == GT:
            return GroupElement(GT, tuple(c.n if hasattr(c, "n") else int(c) for c in pt.coeffs))
        if b.is_inf(pt):
            return GroupElement(tag, None)
        x, y = b.normalize(pt)
        if tag == G1:
            return GroupElement(G1, (x.n, y.n))
        return GroupElement(G2, (tuple(x.coeffs), tuple(y.coeffs)))

    def _to_point(self, x: GroupElement):
        b = self._b
        try:
            if x.tag == GT:
                coeffs = tuple(x.payload)
                if len(coeffs) != 12 or not all(isinstance(c, int) and 0 <= c < b.field_modulus for c in coeffs):
                    raise ValueError
                return b.FQ12(coeffs)
            if x.tag == G1:
                if x.payload is None:
                    return b.Z1
                px, py = x.payload
                pt = (b.FQ(px), b.FQ(py), b.FQ.one())
                curve_b = b.b
            elif x.tag == G2:
                if x.payload is None:
                    return b.Z2
                (x0, x1), (y0, y1) = x.payload
                pt = (b.FQ2([x0, x1]), b.FQ2([y0, y1]), b.FQ2.one())
                curve_b = b.b2
            else:
                raise ValueError
        except (TypeError, ValueError) as exc:
            raise MalformedElement(f"bad {x.tag} encoding") from exc
        if not b.is_on_curve(pt, curve_b):
            raise MalformedElement(f"{x.tag} point not on curve")
        return pt

    # -- group API --------------------------------------------------------------
    def generator(self, tag):
        if tag == G1:
            return self._g1
        if tag == G2:
            return self._g2
        return self.pairing(self._g1, self._g2)

    def identity(self, tag):
        if tag == GT:
            return self._from_point(GT, self._b.FQ12.one())
        return GroupElement(tag, None)

    def exp(self, base, s):
        pt = self._to_point(base)
        s %= self.q
        if base.tag == GT:
            return self._from_point(GT, pt ** s)
        return self._from_point(base.tag, self._b.multiply(pt, s))

    def mul(self, a, b):
        if a.tag != b.tag:
            raise TagMismatch(f"{a.tag} * {b.tag}")
        pa, pb = self._to_point(a), self._to_point(b)
        if a.tag == GT:
            return self._from_point(GT, pa * pb)
        return self._from_point(a.tag, self._b.add(pa, pb))

    def inv(self, a):
        if a.tag == GT:
            return self.exp(a, self.q - 1)
        return self._from_point(a.tag, self._b.neg(self._to_point(a)))

    def pairing(self, a, b):
        self._check_tag(a, G1)
        self._check_tag(b, G2)
        return self._from_point(GT, self._b.pairing(self._to_point(b), self._to_point(a)))

    def is_member(self, x):
        try:
            pt = self._to_point(x)
        except MalformedElement:
            return False
        if x.tag == GT:
            return pt ** self.q == self._b.FQ12.one()
        return self._b.is_inf(self._b.multiply(pt, self.q))

    def nonmember(self, tag: str) -> GroupElement:
        """On-curve but outside the prime-order subgroup (G1); off-curve otherwise."""
        if tag != G1:
            return GroupElement(tag, ((1, 0), (1, 0)) if tag == G2 else (0,) * 12)
        b = self._b
        p = b.field_modulus
        x = 1
        while True:
            rhs = (x ** 3 + 4) % p
            y = pow(rhs, (p + 1) // 4, p)
            if y * y % p == rhs:
                cand = GroupElement(G1, (x, y))
                if not self.is_member(cand):
                    return cand
            x += 1

    def encode_payload(self, x):
        from py_ecc.bls.point_compression import compress_G1, compress_G2

        try:
            pt = self._to_point(x)
        except MalformedElement:
            return b"\xff" + repr(x.payload).encode()
        if x.tag == G1:
            return compress_G1(pt).to_bytes(48, "big")
        if x.tag == G2:
            z1, z2 = compress_G2(pt)
            return z1.to_bytes(48, "big") + z2.to_bytes(48, "big")
        return b"".join(c.to_bytes(48, "big") for c in x.payload)


def make_suite(backend: str = "mock", q: int | None = None) -> GroupSuite:
    if backend == "mock":
        return MockSuite(q or 101)
    if backend == "pairing":
        if q is not None:
            raise ValueError("the pairing backend fixes its own group order")
        return PairingSuite()
    raise ValueError(f"unknown backend {backend!r}")


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
