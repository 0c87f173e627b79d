import random

from escrowdkg.behaviors import (
    DigestMismatch,
    InconsistentDualPair,
    InconsistentSubshare,
    UnjustComplainer,
    Withhold,
)
from escrowdkg.escrow_dkg import DkgConfig, Phase, run_escrow_dkg
from escrowdkg.eth_dkg import (
    check_g1g2_consistency,
    commitment_digest,
    dual_commit,
    inconsistent_index,
    run_eth_dkg,
)
from escrowdkg.group_suite import G1, G2
from escrowdkg.secret_sharing import sample_polynomial, verify_subshare
from escrowdkg.seeding import participant_polynomial

CFG = DkgConfig(n=5, t=2, delta=100, epoch=3)


def test_consistency_examples(suite):
    s = 19
    x1, x2 = suite.exp(suite.g1, s), suite.exp(suite.g2, s)
    assert check_g1g2_consistency(suite, x1, x2)
    assert not check_g1g2_consistency(suite, x1, suite.exp(suite.g2, s + 1))


def test_consistency_rejects_nonmembers_and_swapped_tags(mock):
    assert not check_g1g2_consistency(mock, mock.nonmember(G1), mock.g2)
    assert not check_g1g2_consistency(mock, mock.g2, mock.g1)


def test_random_dual_commitments_consistent(mock):
    rng = random.Random(0)
    for _ in range(200):
        D = dual_commit(mock, sample_polynomial(rng.randint(1, 5), rng, 101))
        assert inconsistent_index(mock, D) is None


def test_g1_sufficiency_exhaustive(mock):
    rng = random.Random(1)
    for _ in range(20):
        f = sample_polynomial(3, rng, 101)
        D = dual_commit(mock, f)
        j = rng.randint(1, 100)
        for x in range(101):
            assert verify_subshare(mock, j, x, D.c1) == verify_subshare(mock, j, x, D.c2)


def test_digest_is_recomputable(mock):
    f = sample_polynomial(2, random.Random(2), 101)
    assert commitment_digest(mock, dual_commit(mock, f)) == commitment_digest(mock, dual_commit(mock, f))
    g = sample_polynomial(2, random.Random(3), 101)
    assert commitment_digest(mock, dual_commit(mock, f)) != commitment_digest(mock, dual_commit(mock, g))


def test_honest_run(mock):
    seed = 4
    run = run_eth_dkg(mock, CFG, seed=seed)
    assert run.machine.phase == Phase.CONCLUDED
    assert run.machine.onchain_writes == 5
    secret = sum(participant_polynomial(seed, i, 2, 101).secret for i in range(1, 6)) % 101
    assert run.result.public_key == mock.exp(mock.g2, secret)
    esc = run_escrow_dkg(mock, CFG, seed=seed).result
    assert run.result.secret_shares == esc.secret_shares
    assert run.result.public_shares == esc.public_shares


def _failed(mock, behaviors, seed=1, drops=()):
    run = run_eth_dkg(mock, CFG, behaviors, seed=seed, drops=drops, refund_on_failure=False)
    assert run.machine.phase == Phase.FAILED
    assert run.ledger.conservation_ok()
    return run.machine.rulings[0], run


def test_digest_mismatch_cm1(mock):
    r, run = _failed(mock, ["honest", DigestMismatch(recipient=3)] + ["honest"] * 3)
    assert (r.label, r.justified, r.accused, r.prover) == ("cm1'", True, 2, 3)
    assert run.ledger.net(2) == -100_000


def test_inconsistent_pair_cm2(mock):
    r, run = _failed(mock, ["honest", "honest", InconsistentDualPair(k0=1), "honest", "honest"])
    assert (r.label, r.justified, r.accused) == ("cm2'", True, 3)
    assert run.transcript.of_type("complaint")[0].data["kind"] == "cm2'"


def test_bad_subshare_cm3_runs_dispute(mock):
    r, run = _failed(mock, ["honest", InconsistentSubshare(recipient=4)] + ["honest"] * 3)
    assert (r.label, r.justified, r.accused, r.prover) == ("cm3'", True, 2, 4)
    assert run.ledger.net(4) == 50_000
    assert run.transcript.of_type("dispute_turn")


def test_unjust_cm3_slashes_prover(mock):
    r, run = _failed(mock, ["honest", "honest", UnjustComplainer("cm4", 1), "honest", "honest"])
    assert (r.label, r.justified) == ("cm3'", False)
    assert r.net_slashed == [3]


def test_missing_subshare_answered_on_chain(mock):
    behaviors = ["honest", Withhold(tx="tx3", target=4, respond_on_alert=True)] + ["honest"] * 3
    run = run_eth_dkg(mock, CFG, behaviors, seed=6)
    m = run.machine
    assert m.phase == Phase.CONCLUDED
    assert len(run.transcript.of_type("alert")) == 1
    assert len(run.transcript.of_type("tx3_onchain")) == 1
    assert m.onchain_writes == 5 + 2
    assert run.result.secret_shares == run_escrow_dkg(mock, CFG, seed=6).result.secret_shares
    assert m.alert(4, 2, 3) is None
    assert run.transcript.of_type("alert_noop")
    assert run.ledger.burned_total == 0


def test_dropped_message_answered_on_chain(mock):
    run = run_eth_dkg(mock, CFG, seed=2, drops=[(3, 2, 4), (2, 1, 5)])
    assert run.machine.phase == Phase.CONCLUDED
    assert len(run.transcript.of_type("tx2_onchain")) == 1
    assert len(run.transcript.of_type("tx3_onchain")) == 1


def test_silent_dealer_cm4(mock):
    for tx, kind in (("tx3", 3), ("tx2", 2)):
        r, run = _failed(mock, ["honest", Withhold(tx=tx, target=4)] + ["honest"] * 3)
        assert (r.label, r.justified, r.accused) == ("cm4'", True, 2)
        assert r.kind == ("cm3" if kind == 3 else "cm1")
        assert run.ledger.net(2) == -100_000


def test_pairing_consistency_few(pairing):
    rng = random.Random(5)
    D = dual_commit(pairing, sample_polynomial(1, rng, pairing.q))
    assert inconsistent_index(pairing, D) is None
    assert D.c2.tag == G2
