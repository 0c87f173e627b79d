import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from escrowdkg.group_suite import G1, G2, GroupElement, MockSuite
from escrowdkg.secret_sharing import (
    CommitmentVector,
    Polynomial,
    commit,
    elgamal_decrypt,
    elgamal_encrypt,
    elgamal_keygen,
    evaluate,
    hash_commit,
    lagrange_interpolate,
    public_share,
    sample_polynomial,
    verify_subshare,
)
from escrowdkg.seeding import derive_rng


def test_sampling_deterministic_and_in_range():
    f1 = sample_polynomial(3, derive_rng(7, "poly"), 101)
    f2 = sample_polynomial(3, derive_rng(7, "poly"), 101)
    assert f1 == f2 and f1.degree == 3
    assert all(0 <= a < 101 for a in sample_polynomial(2, random.Random(1), 101).coefficients)
    with pytest.raises(ValueError):
        sample_polynomial(0, random.Random(1), 101)


def test_constant_term_uniform():
    counts = [0] * 101
    for s in range(10_000):
        counts[sample_polynomial(1, derive_rng(s, "uniform"), 101).secret] += 1
    mean = 10_000 / 101
    sigma = (mean * (1 - 1 / 101)) ** 0.5
    assert all(abs(c - mean) <= 4 * sigma for c in counts)


def test_evaluate_examples():
    f = Polynomial((1, 2), 101)
    assert evaluate(f, 0) == 1
    assert f(2) == 5


def test_evaluate_matches_power_sum():
    f = sample_polynomial(5, random.Random(3), 101)
    for z in range(101):
        assert f(z) == sum(a * z ** k for k, a in enumerate(f.coefficients)) % 101


def test_interpolation_examples():
    assert lagrange_interpolate([(1, 3), (2, 5)], 0, 101) == 1
    assert lagrange_interpolate([(5, 9)], 0, 101) == 9
    assert lagrange_interpolate([(5, 9)], 77, 101) == 9


def test_interpolation_recovers_secret():
    rng = random.Random(11)
    for _ in range(100):
        f = sample_polynomial(4, rng, 101)
        pts = [(j, f(j)) for j in rng.sample(range(1, 101), 5)]
        assert lagrange_interpolate(pts, 0, 101) == f.secret


def test_interpolation_rejects_bad_indices():
    with pytest.raises(ValueError):
        lagrange_interpolate([(1, 3), (1, 4)], 0, 101)
    with pytest.raises(ValueError):
        lagrange_interpolate([(0, 3), (2, 4)], 0, 101)


def test_every_subset_interpolates_n6_t2():
    f = sample_polynomial(2, random.Random(2), 101)
    shares = {j: f(j) for j in range(1, 7)}
    for subset in itertools.combinations(shares, 3):
        assert lagrange_interpolate([(j, shares[j]) for j in subset], 0, 101) == f.secret


def test_commit_examples(mock):
    C = commit(mock, Polynomial((1, 2), 101), G1)
    assert [X.payload for X in C.elements] == [1, 2]
    zero = commit(mock, Polynomial((0, 0, 0), 101), G2)
    assert all(X == mock.identity(G2) for X in zero.elements)


def test_verify_subshare_example(mock):
    C = CommitmentVector(G1, (mock.element(G1, 2), mock.element(G1, 3)))
    assert verify_subshare(mock, 2, 8, C)
    assert not verify_subshare(mock, 2, 9, C)


def test_verify_roundtrip_and_perturbation(mock):
    rng = random.Random(4)
    for _ in range(100):
        f = sample_polynomial(3, rng, 101)
        C = commit(mock, f, G1)
        for j in range(1, 8):
            assert verify_subshare(mock, j, f(j), C)
            assert not verify_subshare(mock, j, (f(j) + 1) % 101, C)


def test_verify_accepts_exactly_true_value(mock):
    f = sample_polynomial(2, random.Random(8), 101)
    C = commit(mock, f, G2)
    for j in (1, 4, 100):
        accepted = [x for x in range(101) if verify_subshare(mock, j, x, C)]
        assert accepted == [f(j)]


def test_verify_with_nonmember_is_false(mock):
    C = CommitmentVector(G1, (mock.nonmember(G1), mock.element(G1, 1)))
    assert not verify_subshare(mock, 1, 1, C)


def test_verify_pairing_backend(pairing):
    f = sample_polynomial(2, random.Random(1), pairing.q)
    C = commit(pairing, f, G1)
    assert verify_subshare(pairing, 3, f(3), C)
    assert not verify_subshare(pairing, 3, f(3) + 1, C)


def test_additivity(mock):
    rng = random.Random(9)
    f, g = sample_polynomial(2, rng, 101), sample_polynomial(2, rng, 101)
    h = f + g
    for j in range(1, 6):
        assert h(j) == (f(j) + g(j)) % 101
    Cf, Cg, Ch = (commit(mock, p, G1) for p in (f, g, h))
    assert all(mock.mul(a, b) == c for a, b, c in zip(Cf.elements, Cg.elements, Ch.elements))
    assert public_share(mock, [Cf, Cg], 4) == mock.exp(mock.g1, h(4))


def test_elgamal_roundtrip(suite):
    rng = random.Random(21)
    trials = 100 if suite.backend_id == "mock" else 2
    for _ in range(trials):
        keys = elgamal_keygen(suite, rng)
        x = rng.randrange(suite.q)
        assert elgamal_decrypt(suite, elgamal_encrypt(suite, x, keys.public, rng), keys.secret) == x
    keys = elgamal_keygen(suite, rng)
    assert elgamal_decrypt(suite, elgamal_encrypt(suite, 0, keys.public, rng), keys.secret) == 0


def test_elgamal_wrong_key(wide):
    rng = random.Random(22)
    mismatches = 0
    for _ in range(100):
        keys = elgamal_keygen(wide, rng)
        x = rng.randrange(wide.q)
        ct = elgamal_encrypt(wide, x, keys.public, rng)
        mismatches += elgamal_decrypt(wide, ct, (keys.secret + 1) % wide.q) != x
    assert mismatches >= 99


def test_elgamal_rejects_nonmember_key(mock):
    with pytest.raises(ValueError):
        elgamal_encrypt(mock, 5, mock.nonmember(G1), random.Random(0))


def test_hash_commit(mock):
    X = mock.element(G2, 17)
    assert hash_commit(mock, X) == hash_commit(mock, X)
    assert len(hash_commit(mock, X)) == 32
    digests = {hash_commit(mock, mock.element(G2, v)) for v in range(101)}
    assert len(digests) == 101
    # a non-member still has a digest, which differs from every member's
    assert hash_commit(mock, mock.nonmember(G2)) not in digests


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32), st.data())
def test_any_t_plus_one_shares_interpolate(t, seed, data):
    f = sample_polynomial(t, random.Random(seed), 101)
    idx = data.draw(st.lists(st.integers(1, 100), min_size=t + 1, max_size=t + 1, unique=True))
    assert lagrange_interpolate([(j, f(j)) for j in idx], 0, 101) == f.secret


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 50))
def test_commitment_evaluates_to_share(seed, j):
    m = MockSuite(101)
    f = sample_polynomial(3, random.Random(seed), 101)
    assert verify_subshare(m, j, f(j), commit(m, f, G1))
    assert public_share(m, [commit(m, f, G1)], j) == GroupElement(G1, f(j))
