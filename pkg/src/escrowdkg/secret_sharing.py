"""Polynomials over Z_q, Shamir/Feldman sharing, hash commitments, hashed ElGamal."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .group_suite import G1, GroupElement, GroupError, GroupSuite, digest


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple[int, ...]
    q: int

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def secret(self) -> int:
        return self.coefficients[0]

    def __call__(self, z: int) -> int:
        return evaluate(self, z)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.q != other.q:
            raise ValueError("polynomials over different fields")
        n = max(len(self.coefficients), len(other.coefficients))
        a = self.coefficients + (0,) * (n - len(self.coefficients))
        b = other.coefficients + (0,) * (n - len(other.coefficients))
        return Polynomial(tuple((x + y) % self.q for x, y in zip(a, b)), self.q)


@dataclass(frozen=True)
class CommitmentVector:
    tag: str
    elements: tuple[GroupElement, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, k: int) -> GroupElement:
        return self.elements[k]


@dataclass(frozen=True)
class SubShare:
    dealer: int
    recipient: int
    value: int


@dataclass(frozen=True)
class ElGamalKeyPair:
    secret: int
    public: GroupElement


@dataclass(frozen=True)
class ElGamalCiphertext:
    c1: GroupElement
    c2: int


def sample_polynomial(t: int, rng: random.Random, q: int) -> Polynomial:
    if t < 1:
        raise ValueError("threshold t must be >= 1")
    return Polynomial(tuple(rng.randrange(q) for _ in range(t + 1)), q)


def evaluate(f: Polynomial, z: int) -> int:
    acc = 0
    for a in reversed(f.coefficients):
        acc = (acc * z + a) % f.q
    return acc


def lagrange_coefficients(indices, at: int, q: int) -> dict[int, int]:
    """Weights w_i such that p(at) = sum w_i * p(i) for deg p < len(indices)."""
    indices = list(indices)
    if not indices:
        raise ValueError("need at least one point")
    if len(set(i % q for i in indices)) != len(indices):
        raise ValueError(f"duplicate interpolation indices {indices}")
    weights = {}
    for i in indices:
        num, den = 1, 1
        for j in indices:
            if j == i:
                continue
            num = num * (at - j) % q
            den = den * (i - j) % q
        weights[i] = num * pow(den, -1, q) % q
    return weights


def lagrange_interpolate(points, at: int, q: int) -> int:
    points = list(points)
    if at % q == 0 and any(i % q == 0 for i, _ in points):
        raise ValueError("index 0 cannot be used when interpolating at 0")
    weights = lagrange_coefficients([i for i, _ in points], at, q)
    return sum(weights[i] * v for i, v in points) % q


def commit(suite: GroupSuite, f: Polynomial, tag: str) -> CommitmentVector:
    g = suite.generator(tag)
    return CommitmentVector(tag, tuple(suite.exp(g, a) for a in f.coefficients))


def commitment_eval(suite: GroupSuite, C: CommitmentVector, j: int) -> GroupElement:
    """prod_k C_k^(j^k): g raised to the committed polynomial at j."""
    acc = suite.identity(C.tag)
    power = 1
    for X in C.elements:
        acc = suite.mul(acc, suite.exp(X, power))
        power = power * j % suite.q
    return acc


def verify_subshare(suite: GroupSuite, j: int, x: int, C: CommitmentVector) -> bool:
    if not len(C):
        raise ValueError("empty commitment vector")
    try:
        return suite.exp(suite.generator(C.tag), x) == commitment_eval(suite, C, j)
    except GroupError:
        return False


def public_share(suite: GroupSuite, commitments, j: int) -> GroupElement:
    """g^{x_j} for the summed polynomial, computed from public commitments only."""
    tag = next(iter(commitments)).tag
    return suite.product((commitment_eval(suite, C, j) for C in commitments), tag)


def hash_commit(suite: GroupSuite, x: GroupElement) -> bytes:
    return digest(suite.serialize(x))


def elgamal_keygen(suite: GroupSuite, rng: random.Random) -> ElGamalKeyPair:
    xi = suite.random_scalar(rng)
    return ElGamalKeyPair(xi, suite.exp(suite.g1, xi))


def _mask(suite: GroupSuite, shared: GroupElement) -> int:
    return int.from_bytes(digest(suite.serialize(shared)), "big") % suite.q


def elgamal_encrypt(suite: GroupSuite, x: int, pk: GroupElement, rng: random.Random) -> ElGamalCiphertext:
    if pk.tag != G1 or not suite.is_member(pk):
        raise ValueError("encryption key is not a member of the key group")
    r = suite.random_scalar(rng)
    return ElGamalCiphertext(suite.exp(suite.g1, r), (x + _mask(suite, suite.exp(pk, r))) % suite.q)


def elgamal_decrypt(suite: GroupSuite, ct: ElGamalCiphertext, xi: int) -> int:
    return (ct.c2 - _mask(suite, suite.exp(ct.c1, xi))) % suite.q
