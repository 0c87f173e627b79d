import json
from pathlib import Path

import pytest

from escrowdkg.behaviors import BadPublicData, Framer, InconsistentSubshare, Withhold
from escrowdkg.sim_harness import (
    Scenario,
    ScenarioError,
    differential_run,
    run_scenario,
    run_with_relaunch,
    summary_csv,
    sweep,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def _colluders(framer):
    return [{"kind": "colluder", "group": "A"}, {"kind": "colluder", "group": "A"}, framer, "honest", "honest"]


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        Scenario(n=5, behaviors=["honest"] * 4)
    with pytest.raises(ScenarioError):
        Scenario(protocol="nope")
    with pytest.raises(ScenarioError):
        Scenario(behaviors=[{"kind": "colluder", "group": "A"}] + ["honest"] * 4)
    with pytest.raises(ScenarioError):
        Scenario.from_dict({"n": 5, "colour": "red"})
    with pytest.raises(ScenarioError):
        Scenario(t=5)
    with pytest.raises(ScenarioError):
        Scenario(behaviors=["sneaky"] * 5)


def test_scenario_roundtrip():
    s = Scenario.from_file(SCENARIOS / "colluders_frame.json")
    assert Scenario.from_dict(s.to_dict()).to_dict() == s.to_dict()


def test_honest_run_is_deterministic():
    a = run_scenario(Scenario(seed=4, beacon_rounds=3))
    b = run_scenario(Scenario(seed=4, beacon_rounds=3))
    assert a.ok and a.transcript.lines() == b.transcript.lines()
    assert len(a.transcript.of_type("beacon_round")) == 3
    assert a.summary["burned"] == 0 and a.summary["conservation_ok"]
    c = run_scenario(Scenario(seed=5, beacon_rounds=3))
    assert c.transcript.lines() != a.transcript.lines()


def test_transcript_lines_are_json():
    res = run_scenario(Scenario(seed=1))
    *events, summary = [json.loads(line) for line in res.transcript.lines()]
    for ev in events:
        assert {"event", "height", "sender"} <= set(ev)
    assert summary["outcome"] == "success"


@pytest.mark.parametrize("behavior,kind", [
    (Withhold(tx="tx2"), "cm1"),
    ({"kind": "bad_hash_commit"}, "cm2"),
    ({"kind": "nonmember_commitment", "k": 2}, "cm2"),
    (Withhold(tx="tx3", target=1), "cm3"),
    (InconsistentSubshare(recipient=1), "cm4"),
    ({"kind": "unjust_complainer", "complaint": "cm4", "target": 1}, "cm4"),
    ({"kind": "unjust_complainer", "complaint": "cm1", "target": 1}, "cm1"),
])
def test_failure_scenarios(behavior, kind):
    res = run_scenario(Scenario(seed=2, behaviors=["honest", behavior, "honest", "honest", "honest"]))
    assert res.outcome == "failed"
    assert res.summary["rulings"][0]["kind"] == kind
    assert res.summary["slashed"] == ["P2"]
    assert res.summary["net"]["P2"] == -100_000
    assert res.summary["conservation_ok"]


def test_bad_public_data_slashes_after_conclusion():
    res = run_scenario(Scenario(seed=2, beacon_rounds=2,
                                behaviors=["honest", BadPublicData(), "honest", "honest", "honest"]))
    assert res.outcome == "success"
    assert res.summary["rulings"][0]["kind"] == "cm5" and res.summary["slashed"] == ["P2"]
    assert res.transcript.of_type("share_revealed")
    assert len(res.transcript.of_type("beacon_round")) == 2


def test_framing_participant():
    res = run_scenario(Scenario(seed=11, beacon_rounds=1, behaviors=_colluders({"kind": "framer", "group": "A"})))
    assert res.outcome == "framed"
    net = res.summary["net"]
    assert net["P3"] == 200_000
    assert all(net[f"P{i}"] == -100_000 for i in (1, 2, 4, 5))
    assert res.summary["burned"] == 200_000


def test_framing_external_and_half():
    ext = run_scenario(Scenario(seed=11, behaviors=_colluders(Framer(external=True))))
    assert ext.outcome == "framed"
    assert ext.summary["net"]["E3"] == 200_000 and ext.summary["burned"] == 300_000
    half = run_scenario(Scenario(seed=11, framing_reward="half", behaviors=_colluders(Framer())))
    assert half.summary["net"]["P3"] == 100_000


def test_framing_early_beacon():
    res = run_scenario(Scenario(seed=11, beacon_rounds=2, beacon_period=5,
                                behaviors=_colluders(Framer(evidence="early_beacon"))))
    assert res.outcome == "framed"
    assert res.summary["rulings"][-1]["justified"]


def test_collusion_without_framer():
    res = run_scenario(Scenario(seed=1, behaviors=[{"kind": "colluder", "group": "A"}] * 3 + ["honest"] * 2))
    assert res.outcome == "colluded" and res.summary["burned"] == 0


def test_noncooperation_halts():
    res = run_scenario(Scenario.from_file(SCENARIOS / "noncooperation.json"))
    assert res.outcome == "halted"
    assert res.summary["burned"] == 500_000 and res.summary["conservation_ok"]


def test_enrollment_abort():
    res = run_scenario(Scenario(seed=0, behaviors=["honest", Withhold(tx="tx1")] + ["honest"] * 3))
    assert res.outcome == "aborted" and res.summary["burned"] == 0


def test_eth_and_ped_protocols():
    eth = run_scenario(Scenario.from_file(SCENARIOS / "eth_missing_data.json"))
    assert eth.ok
    ped = run_scenario(Scenario(protocol="ped_dkg", seed=3))
    esc = run_scenario(Scenario(seed=3))
    assert ped.ok and ped.summary["public_key"] == esc.summary["public_key"]


def test_differential_run():
    for seed in range(5):
        assert differential_run(seed, 5, 2)["all_equal"]
    r = differential_run(0, 5, 2, behaviors=["honest", Withhold(tx="tx2")] + ["honest"] * 3)
    assert not r["all_equal"] and r["escrow_outcome"] == "Failed"


def test_relaunch_excludes_slashed():
    results = run_with_relaunch(Scenario(seed=1, behaviors=["honest", InconsistentSubshare(recipient=3)] + ["honest"] * 3))
    assert [r.outcome for r in results] == ["failed", "success"]
    assert results[1].scenario.n == 4


def test_sweep_matches_serial():
    scenarios = [Scenario(seed=s) for s in range(4)]
    serial = sweep(scenarios, workers=1)
    parallel = sweep(scenarios, workers=2)
    assert serial == parallel
    csv_text = summary_csv(serial)
    assert csv_text.splitlines()[0].startswith("name,protocol,seed,outcome")
    assert len(csv_text.splitlines()) == 5
