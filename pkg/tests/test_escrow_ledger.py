from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from escrowdkg.escrow_ledger import EscrowLedger, LedgerError, make_ruling, units

D = units(100)
PARTS = [1, 2, 3, 4, 5]


def _ledger(parts=PARTS, delta=D):
    led = EscrowLedger()
    for i in parts:
        led.deposit(i, delta)
    return led


def test_units():
    assert units(100) == 100_000
    assert units("12.5") == 12_500
    assert units(Fraction(1, 8)) == 125
    with pytest.raises(ValueError):
        units("0.0001")


def test_deposit_basics():
    led = EscrowLedger()
    led.deposit(3, 10000)
    assert led.deposits[3] == 10000
    with pytest.raises(LedgerError):
        led.deposit(3, 10000)
    with pytest.raises(LedgerError):
        led.deposit(4, 0)
    assert _ledger().inflow == 5 * D


def test_cm1_justified():
    led = _ledger()
    r = make_ruling("cm1", True, 1, 2, PARTS, 2, D)
    led.apply_ruling(r)
    assert led.net(2) == -100_000
    assert [led.net(i) for i in (1, 3, 4, 5)] == [12_500] * 4
    assert led.burned_total == 50_000 == r.burn
    assert led.conservation_ok()


def test_cm4_justified():
    led = _ledger()
    r = make_ruling("cm4", True, 4, 2, PARTS, 2, D)
    led.apply_ruling(r)
    assert (led.net(2), led.net(4), led.burned_total) == (-100_000, 50_000, 50_000)
    assert [led.net(i) for i in (1, 3, 5)] == [0, 0, 0]


def test_unjustified_slashes_prover():
    led = _ledger()
    r = make_ruling("cm4", False, 4, 2, PARTS, 2, D)
    led.apply_ruling(r)
    assert led.net(4) == -100_000
    assert [led.net(i) for i in (1, 2, 3, 5)] == [12_500] * 4
    assert r.burn == 50_000


def test_external_framer_t3():
    led = _ledger()
    led.bond("E", D)
    r = make_ruling("fm", True, "E", None, PARTS, 3, D)
    led.apply_ruling(r)
    assert [led.net(i) for i in PARTS] == [-100_000] * 5
    assert led.net("E") == 300_000
    assert led.burned_total == 200_000 == 2 * D
    assert led.conservation_ok()


def test_participant_framer_readings():
    keep = make_ruling("fm", True, 3, None, PARTS, 3, D)
    assert keep.burn == (5 - 3 - 1) * D
    forfeit = make_ruling("fm", True, 3, None, PARTS, 3, D, participant_framer_forfeits=True)
    assert forfeit.burn == (5 - 3) * D
    half = make_ruling("fm", True, "E", None, PARTS, 3, D, framing_reward="half")
    assert half.rewards == 3 * D // 2 and half.burn == 5 * D - 3 * D // 2


def test_uneven_reward_rounds_down_into_burn():
    parts = [1, 2, 3, 4]
    r = make_ruling("cm3", True, 1, 2, parts, 1, 1000)
    assert r.transfers[1:] == ((1, 166), (3, 166), (4, 166))
    assert r.burn == 1000 - 3 * 166


def test_insufficient_deposit_is_atomic():
    led = _ledger()
    led.apply_ruling(make_ruling("cm1", True, 1, 2, PARTS, 2, D))
    before = led.snapshot()
    with pytest.raises(LedgerError):
        led.apply_ruling(make_ruling("cm3", True, 1, 2, PARTS, 2, D))
    assert led.snapshot() == before


def test_reward_exceeding_pool_rejected():
    with pytest.raises(LedgerError):
        make_ruling("fm", True, 1, None, [1, 2], 5, D)
    with pytest.raises(ValueError):
        make_ruling("cm9", True, 1, 2, PARTS, 2, D)


def test_burn_all_and_refund():
    led = _ledger()
    led.apply_ruling(make_ruling("cm2", True, 1, 2, PARTS, 2, D))
    led.burn_all()
    assert led.remaining() == 0 and led.conservation_ok()
    led2 = _ledger()
    led2.refund_all()
    assert led2.burned_total == 0 and sum(led2.refunded.values()) == 5 * D
    assert all(led2.net(i) == 0 for i in PARTS)


rulings = st.tuples(
    st.sampled_from(["cm1", "cm2", "cm3", "cm4", "cm5", "fm"]),
    st.booleans(),
    st.integers(1, 7),
    st.integers(1, 7),
)


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 7), st.integers(1, 10_000), st.lists(rulings, max_size=8))
def test_conservation_and_positive_burn(n, delta, seq):
    parts = list(range(1, n + 1))
    t = (n - 1) // 2
    led = _ledger(parts, delta)
    for kind, just, prover, accused in seq:
        prover, accused = (prover - 1) % n + 1, (accused - 1) % n + 1
        if prover == accused:
            continue
        r = make_ruling(kind, just, prover, accused, parts, t, delta)
        assert r.burn > 0
        assert sum(a for _, a in r.transfers) + r.burn == 0
        if kind != "fm" or not just:
            assert len(r.net_slashed) == 1
        try:
            led.apply_ruling(r)
        except LedgerError:
            pass
        assert led.conservation_ok()
        assert all(v >= 0 for v in led.deposits.values())
