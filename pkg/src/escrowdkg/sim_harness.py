"""Scenario engine: DKG, beacon application stage, collusion and framing, settlement."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

from .beacon import Beacon, BeaconState, aggregate, elect_leader, sign_share
from .behaviors import Framer, SilentNoncooperator, collusion_groups, parse_behavior
from .escrow_dkg import Complaint, DkgConfig, FramingEvidence, Phase, run_escrow_dkg
from .eth_dkg import run_eth_dkg
from .group_suite import make_suite
from .ped_dkg import run_ped_dkg
from .secret_sharing import lagrange_interpolate
from .transcript import Transcript, entity_name

PROTOCOLS = ("escrow_dkg", "eth_dkg", "ped_dkg")


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    n: int = 5
    t: int = 2
    delta: object = 100
    epoch: int = 10
    q: int | None = None
    backend: str = "mock"
    seed: int = 0
    protocol: str = "escrow_dkg"
    behaviors: list = field(default_factory=list)
    beacon_rounds: int = 0
    beacon_period: int = 1
    framing_reward: str = "full"
    publish_public: bool = True
    drops: list = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        if not self.behaviors:
            self.behaviors = ["honest"] * self.n
        try:
            self.behaviors = [parse_behavior(b) for b in self.behaviors]
            self.config()
        except (TypeError, ValueError) as exc:
            raise ScenarioError(str(exc)) from exc
        if len(self.behaviors) != self.n:
            raise ScenarioError(f"{len(self.behaviors)} behaviors for n={self.n}")
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {self.protocol!r}")
        if self.backend not in ("mock", "pairing"):
            raise ScenarioError(f"unknown backend {self.backend!r}")
        if self.beacon_rounds < 0 or self.beacon_period < 1:
            raise ScenarioError("beacon rounds must be >= 0 and period >= 1")
        for gid, members in collusion_groups(self.behaviors).items():
            if len(members) < 2:
                raise ScenarioError(f"collusion group {gid!r} needs at least two members")

    def config(self) -> DkgConfig:
        return DkgConfig(self.n, self.t, self.delta, self.epoch, self.framing_reward)

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ScenarioError(f"unknown scenario fields {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> Scenario:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["behaviors"] = [b.to_dict() for b in self.behaviors]
        d["delta"] = str(self.delta)
        return d


@dataclass
class ScenarioResult:
    scenario: Scenario
    transcript: Transcript
    summary: dict
    run: object = None

    @property
    def outcome(self) -> str:
        return self.summary["outcome"]

    @property
    def ok(self) -> bool:
        return self.outcome == "success"


def run_scenario(scenario: Scenario) -> ScenarioResult:
    suite = make_suite(scenario.backend, scenario.q)
    if scenario.protocol == "ped_dkg":
        return _run_ped(scenario, suite)
    log = Transcript()
    log.log(0, "harness", "scenario", None, **_scenario_header(scenario))
    cfg = scenario.config()
    if scenario.protocol == "eth_dkg":
        run = run_eth_dkg(suite, cfg, scenario.behaviors, scenario.seed, scenario.drops, transcript=log)
    else:
        run = run_escrow_dkg(suite, cfg, scenario.behaviors, scenario.seed, transcript=log)
    m = run.machine
    outcome = "success"
    if m.phase != Phase.CONCLUDED:
        outcome = "aborted" if m.failure == "enrollment incomplete" else "failed"
    else:
        key_shares = dict(run.result.secret_shares)
        if scenario.protocol == "escrow_dkg":
            if scenario.publish_public:
                _public_data_stage(m, run, key_shares)
            outcome = _application_stage(scenario, suite, m, run, key_shares)
        else:
            outcome = _eth_application(scenario, suite, run, key_shares)
        if m.ledger.remaining():
            m.log.log(m.height, "escrow", "settled", None, m.ledger.refund_all("refund:settlement"))
    summary = _summary(scenario, run, outcome, suite)
    log.summary = summary
    return ScenarioResult(scenario, log, summary, run)


def _scenario_header(s: Scenario) -> dict:
    return {"protocol": s.protocol, "n": s.n, "t": s.t, "seed": s.seed, "backend": s.backend,
            "behaviors": [b.kind for b in s.behaviors]}


def _public_data_stage(m, run, key_shares):
    """Participants publish g^{x_i}; wrong data draws cm5 without failing the system."""
    for i, agent in sorted(run.participants.items()):
        m.publish_public(i, i, agent.public_value(m))
    for _ in range(len(run.participants)):
        filed = False
        for i, agent in sorted(run.participants.items()):
            c = agent.choose_complaint(m)
            if c is not None and c.kind == "cm5":
                ruling = m.file_complaint(c)
                filed = True
                for loser in ruling.net_slashed:
                    if isinstance(loser, int) and loser not in m.revealed_shares:
                        m.reveal_slashed_share(loser, key_shares[loser])
                break
        if not filed:
            break


def _application_stage(scenario: Scenario, suite, m, run, key_shares) -> str:
    behaviors = scenario.behaviors
    t = scenario.t
    beacon = Beacon(suite, run.result.public_key,
                    run.result.public_shares, t,
                    BeaconState(start=m.height + 1, period=scenario.beacon_period))
    m.beacon = beacon
    silent = {i for i, b in enumerate(behaviors, 1) if isinstance(b, SilentNoncooperator)}
    cooperating = {i: x for i, x in key_shares.items() if i not in silent}
    cooperating.update({i: x for i, x in m.revealed_shares.items() if i in silent})
    for r in range(1, scenario.beacon_rounds + 1):
        while m.height < beacon.state.schedule(r):
            m.advance_block()
        if len(cooperating) < t + 1:
            m.rule_noncooperation(silent)
            return "halted"
        rs = beacon.advance(cooperating, m.height)
        m.log.log(m.height, "beacon", "beacon_round", rs, round=r, rs=rs.hex(),
                  leader=elect_leader(rs, scenario.n))
    return _collusion_stage(scenario, suite, m, beacon, key_shares)


def _collusion_stage(scenario, suite, m, beacon, key_shares) -> str:
    outcome = "success"
    t = scenario.t
    for gid, members in sorted(collusion_groups(scenario.behaviors).items()):
        pooled = {i: key_shares[i] for i in members}
        pooled.update(m.revealed_shares)
        if len(pooled) < t + 1:
            m.log.log(m.height, f"group:{gid}", "collusion_failed", None, members=members)
            continue
        secret = lagrange_interpolate(sorted(pooled.items())[: t + 1], 0, suite.q)
        m.log.log(m.height, f"group:{gid}", "collusion", None, members=members)
        framers = [i for i in members if isinstance(scenario.behaviors[i - 1], Framer)]
        if not framers or m.framed or m.halted:
            outcome = "colluded" if outcome == "success" else outcome
            continue
        framer = framers[0]
        plan: Framer = scenario.behaviors[framer - 1]
        while m.height < plan.trigger_height:
            m.advance_block()
        if plan.evidence == "early_beacon":
            r = beacon.state.round + 1
            shares = [sign_share(suite, beacon.state.current, i, x) for i, x in sorted(pooled.items())]
            sig = aggregate(suite, shares, beacon.state.current, t).signature
            ev = FramingEvidence("early_beacon", round=r, signature=sig)
        else:
            ev = FramingEvidence("secret", secret=secret)
        prover = framer
        if plan.external:
            prover = f"E{framer}"
            m.log.log(m.height, prover, "bond", None, m.ledger.bond(prover, m.config.deposit))
        ruling = m.file_complaint(Complaint("fm", prover, None, framing=ev))
        outcome = "framed" if ruling.justified else outcome
    return outcome


def _eth_application(scenario, suite, run, key_shares) -> str:
    beacon = Beacon(suite, run.result.public_key, run.result.public_shares, scenario.t,
                    BeaconState(start=run.machine.height + 1, period=scenario.beacon_period))
    for r in range(1, scenario.beacon_rounds + 1):
        height = beacon.state.schedule(r)
        rs = beacon.advance(key_shares, height)
        run.machine.log.log(height, "beacon", "beacon_round", rs, round=r, rs=rs.hex(),
                           leader=elect_leader(rs, scenario.n))
    return "success"


def _summary(scenario, run, outcome, suite) -> dict:
    m = run.machine
    led = m.ledger
    rulings = [r.to_dict() for r in m.rulings]
    slashed = sorted({entity_name(e) for r in m.rulings for e in r.net_slashed})
    if getattr(m, "halted", False):
        slashed = sorted(entity_name(i) for i in m.participants)
    summary = {
        "name": scenario.name,
        "protocol": scenario.protocol,
        "seed": scenario.seed,
        "outcome": outcome,
        "failure": m.failure,
        "height": m.height,
        "rulings": rulings,
        "slashed": slashed,
        "burned": led.burned_total,
        "rewards": {entity_name(k): v for k, v in sorted(led.paid_out.items(), key=lambda kv: entity_name(kv[0]))},
        "net": {entity_name(i): led.net(i) for i in sorted(set(led.contributed), key=entity_name)},
        "conservation_ok": led.conservation_ok(),
    }
    if run.result is not None:
        summary["public_key"] = suite.serialize(run.result.public_key).hex()
    return summary


def _run_ped(scenario: Scenario, suite) -> ScenarioResult:
    outcome, log = run_ped_dkg(suite, scenario.n, scenario.t, scenario.behaviors, scenario.seed)
    full = len(outcome.qual) == scenario.n
    summary = {
        "name": scenario.name,
        "protocol": "ped_dkg",
        "seed": scenario.seed,
        "outcome": "success" if full else "reduced_qual",
        "qual": sorted(outcome.qual),
        "disqualified": {str(k): v for k, v in sorted(outcome.disqualified.items())},
        "public_key": suite.serialize(outcome.public_key).hex(),
    }
    log.summary = summary
    return ScenarioResult(scenario, log, summary, outcome)


# -- differential and batch runs ------------------------------------------------------

def differential_run(seed: int, n: int, t: int, q: int = 101, backend: str = "mock", behaviors=None) -> dict:
    suite = make_suite(backend, q if backend == "mock" else None)
    cfg = DkgConfig(n, t, epoch=1)
    esc = run_escrow_dkg(suite, cfg, behaviors, seed)
    eth = run_eth_dkg(suite, cfg, behaviors, seed)
    ped, _ = run_ped_dkg(suite, n, t, behaviors, seed)
    results = {"escrow_dkg": esc.result, "eth_dkg": eth.result}
    report = {
        "seed": seed, "n": n, "t": t,
        "escrow_outcome": esc.machine.phase.value,
        "eth_outcome": eth.machine.phase.value,
        "ped_qual": sorted(ped.qual),
    }

    def secret_of(shares):
        pts = sorted(shares.items())[: t + 1]
        return lagrange_interpolate(pts, 0, suite.q)

    ped_secret = secret_of(ped.secret_shares)
    for name, res in results.items():
        if res is None:
            report[f"{name}_secret_equal"] = False
            report[f"{name}_public_key_equal"] = False
            report[f"{name}_shares_equal"] = False
            continue
        report[f"{name}_secret_equal"] = secret_of(res.secret_shares) == ped_secret
        report[f"{name}_public_key_equal"] = res.public_key == ped.public_key
        report[f"{name}_shares_equal"] = res.secret_shares == ped.secret_shares
    report["all_equal"] = all(v for k, v in report.items() if k.endswith("_equal"))
    return report


def run_with_relaunch(scenario: Scenario, max_attempts: int = 3) -> list[ScenarioResult]:
    """Re-run after a failed DKG without the slashed participants (indices renumbered)."""
    results = []
    current = scenario
    for _ in range(max_attempts):
        res = run_scenario(current)
        results.append(res)
        if res.outcome != "failed":
            break
        losers = {int(name[1:]) for name in res.summary["slashed"] if name[1:].isdigit()}
        keep = [b for i, b in enumerate(current.behaviors, 1) if i not in losers]
        if len(keep) <= current.t:
            break
        current = replace(current, n=len(keep), behaviors=keep, seed=current.seed + 1)
    return results


def _summarize(scenario_dict: dict) -> dict:
    return run_scenario(Scenario.from_dict(scenario_dict)).summary


def sweep(scenarios, workers: int | None = None) -> list[dict]:
    """Run scenarios in isolated processes; results come back in input order."""
    dicts = [s.to_dict() if isinstance(s, Scenario) else dict(s) for s in scenarios]
    workers = workers or min(len(dicts), os.cpu_count() or 1)
    if workers <= 1:
        return [_summarize(d) for d in dicts]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_summarize, dicts))


SUMMARY_FIELDS = ("name", "protocol", "seed", "outcome", "failure", "slashed", "burned", "conservation_ok")


def summary_csv(summaries) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for s in summaries:
        row = dict(s)
        row["slashed"] = ";".join(s.get("slashed", []))
        w.writerow(row)
    return buf.getvalue()
