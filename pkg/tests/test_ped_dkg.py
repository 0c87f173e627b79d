import itertools

import pytest

from escrowdkg.behaviors import InconsistentSubshare, UnjustComplainer, Withhold
from escrowdkg.group_suite import G2
from escrowdkg.ped_dkg import run_ped_dkg
from escrowdkg.secret_sharing import lagrange_interpolate
from escrowdkg.seeding import participant_polynomial


def _secret(seed, idx, t, q=101):
    return sum(participant_polynomial(seed, i, t, q).secret for i in idx) % q


def test_all_honest_n5_t2(mock):
    out, log = run_ped_dkg(mock, 5, 2, seed=3)
    assert out.qual == {1, 2, 3, 4, 5}
    expected = _secret(3, range(1, 6), 2)
    for subset in itertools.combinations(range(1, 6), 3):
        assert lagrange_interpolate([(j, out.secret_shares[j]) for j in subset], 0, 101) == expected
    assert out.public_key == mock.exp(mock.g2, expected)
    assert len(log.of_type("ped_commitments")) == 5


def test_corrupted_share_revealed_keeps_dealer(mock):
    honest, _ = run_ped_dkg(mock, 5, 2, seed=1)
    behaviors = ["honest", InconsistentSubshare(recipient=4), "honest", "honest", "honest"]
    out, log = run_ped_dkg(mock, 5, 2, behaviors, seed=1)
    assert out.qual == {1, 2, 3, 4, 5}
    assert [e.data["accused"] for e in log.of_type("ped_complaint")] == [2]
    assert len(log.of_type("ped_reveal")) == 1
    assert out.secret_shares == honest.secret_shares


def test_unrevealed_share_disqualifies(mock):
    behaviors = ["honest", InconsistentSubshare(recipient=4, reveal_on_complaint=False)] + ["honest"] * 3
    out, _ = run_ped_dkg(mock, 5, 2, behaviors, seed=1)
    assert out.qual == {1, 3, 4, 5}
    assert "fails check" in out.disqualified[2]


def test_more_than_t_complaints_disqualifies(mock):
    behaviors = ["honest", InconsistentSubshare(recipient=(1, 3, 4))] + ["honest"] * 3
    out, _ = run_ped_dkg(mock, 5, 2, behaviors, seed=2)
    assert out.qual == {1, 3, 4, 5}
    assert out.disqualified[2] == "more than t complaints"
    assert out.public_key == mock.exp(mock.g2, _secret(2, [1, 3, 4, 5], 2))


def test_unjust_complaint_is_absorbed(mock):
    honest, _ = run_ped_dkg(mock, 5, 2, seed=4)
    behaviors = ["honest", "honest", UnjustComplainer(target=1), "honest", "honest"]
    out, log = run_ped_dkg(mock, 5, 2, behaviors, seed=4)
    assert out.qual == {1, 2, 3, 4, 5}
    assert out.public_key == honest.public_key
    assert len(log.of_type("ped_reveal")) == 1


def test_withheld_commitments_disqualify(mock):
    out, _ = run_ped_dkg(mock, 5, 2, ["honest", Withhold(tx="tx2")] + ["honest"] * 3, seed=0)
    assert 2 not in out.qual


def test_c1_every_subset_n6_t2(mock):
    out, _ = run_ped_dkg(mock, 6, 2, seed=9)
    values = {
        lagrange_interpolate([(j, out.secret_shares[j]) for j in s], 0, 101)
        for s in itertools.combinations(range(1, 7), 3)
    }
    assert len(values) == 1


def test_c2_and_public_shares(mock):
    out, _ = run_ped_dkg(mock, 6, 2, seed=12)
    x = lagrange_interpolate([(j, out.secret_shares[j]) for j in (1, 2, 3)], 0, 101)
    assert mock.exp(mock.g2, x) == out.public_key
    for j in out.qual:
        assert out.public_shares[j] == mock.exp(mock.g2, out.secret_shares[j])
        assert out.public_shares[j].tag == G2


def test_bad_parameters(mock):
    with pytest.raises(ValueError):
        run_ped_dkg(mock, 2, 2)
    with pytest.raises(ValueError):
        run_ped_dkg(mock, 5, 2, ["honest"] * 4)
