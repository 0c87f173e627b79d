"""Command-line entry point. Every stdout line is one JSON document.

Exit codes: 0 success, 1 the protocol ended in a failure outcome, 2 usage or
configuration error.

Precedence for scenario fields: explicit flag > SEED environment variable
(seed only) > config file > built-in default.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import economics
from .dispute_game import (
    SignatureRegistry,
    cost_report,
    encode_commitments,
    encode_subshare,
    honest_prover,
    run_dispute,
    zeta_all,
)
from .escrow_ledger import units
from .group_suite import G1, make_suite
from .secret_sharing import commit, sample_polynomial
from .sim_harness import Scenario, ScenarioError, run_scenario, summary_csv, sweep
from .transcript import canonical_json

SCENARIO_FLAGS = ("n", "t", "delta", "epoch", "q", "backend", "seed", "framing_reward")


class ConfigError(Exception):
    pass


def _emit(obj, out=None):
    line = canonical_json(obj)
    print(line, file=out or sys.stdout)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--delta")
    p.add_argument("--epoch", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--backend", choices=("mock", "pairing"))
    p.add_argument("--seed", type=int)
    p.add_argument("--file")
    p.add_argument("--out")
    p.add_argument("--rounds", type=int)
    p.add_argument("--framing-reward", dest="framing_reward", choices=("full", "half"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="escrowdkg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dkg-run", help="run one DKG and print its transcript")
    _common(p)
    p.add_argument("--protocol", choices=("escrow_dkg", "eth_dkg", "ped_dkg"))

    p = sub.add_parser("beacon", help="run an honest DKG, then beacon rounds")
    _common(p)

    p = sub.add_parser("dispute-replay", help="replay one sub-share dispute turn by turn")
    _common(p)
    p.add_argument("--bad-share", action="store_true", help="dealer sends a wrong sub-share")
    p.add_argument("--lie-at", type=int, action="append", default=[],
                   help="challenger submits a wrong prefix product at this index")
    p.add_argument("--costs", action="store_true", help="print the cost table instead")
    p.add_argument("--weights", choices=("unit", "evm"), default="unit")

    p = sub.add_parser("econ-analyze", help="collusion and robustness report")
    _common(p)
    p.add_argument("--R", dest="R", required=True)
    p.add_argument("--alpha", default="0")
    p.add_argument("--max-investment", dest="max_investment")
    p.add_argument("--sweep-csv", dest="sweep_csv", help="write the a+b=t+1 split sweep as CSV")

    p = sub.add_parser("scenario", help="run a scenario file")
    _common(p)

    p = sub.add_parser("sweep", help="run many scenarios in parallel")
    _common(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--seeds", type=int, help="run the base scenario for N consecutive seeds from its seed")
    return parser


def _seed(args, fallback=None):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"SEED must be an integer, got {env!r}") from exc
    return fallback


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _scenario_from(args, extra=None) -> Scenario:
    base = _load_json(args.file) if getattr(args, "file", None) else {}
    if not isinstance(base, dict):
        raise ConfigError("scenario file must hold a JSON object")
    base = dict(base)
    for key in SCENARIO_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    seed = _seed(args)
    if seed is not None:
        base["seed"] = seed
    if getattr(args, "rounds", None) is not None:
        base["beacon_rounds"] = args.rounds
    if "n" in base and "behaviors" in base and len(base["behaviors"]) != base["n"] and args.n is not None:
        raise ConfigError("--n disagrees with the behavior list in the file")
    base.update(extra or {})
    return Scenario.from_dict(base)


def _write_transcript(res, args) -> None:
    if args.out:
        res.transcript.write(args.out)
        _emit({"event": "summary", **res.summary})
    else:
        sys.stdout.write(res.transcript.to_jsonl())


def cmd_dkg_run(args) -> int:
    extra = {"protocol": args.protocol} if args.protocol else {}
    res = run_scenario(_scenario_from(args, extra))
    _write_transcript(res, args)
    return 0 if res.ok else 1


def cmd_scenario(args) -> int:
    if not args.file:
        raise ConfigError("scenario needs --file")
    res = run_scenario(_scenario_from(args))
    _write_transcript(res, args)
    return 0 if res.ok else 1


def cmd_beacon(args) -> int:
    sc = _scenario_from(args, {"beacon_rounds": args.rounds if args.rounds is not None else 10})
    res = run_scenario(sc)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for ev in res.transcript.of_type("beacon_round"):
            _emit({"round": ev.data["round"], "height": ev.height, "rs": ev.data["rs"],
                   "leader": ev.data["leader"]}, out)
        _emit({"event": "summary", "outcome": res.outcome, "rounds": len(res.transcript.of_type("beacon_round"))}, out)
    finally:
        if args.out:
            out.close()
    return 0 if res.ok else 1


def cmd_dispute_replay(args) -> int:
    if args.costs:
        ts = [1, 5, 10, 15, 20, 50, 100, 500, 1000, 10000, 100000]
        for row in cost_report(ts, args.weights):
            _emit(row)
        return 0
    cfg = _load_json(args.file) if args.file else {}
    t = args.t if args.t is not None else cfg.get("t", 2)
    q = args.q if args.q is not None else cfg.get("q", 101)
    seed = _seed(args, cfg.get("seed", 0))
    bad = args.bad_share or cfg.get("bad_share", False)
    lies = set(args.lie_at or cfg.get("lie_at", []))
    j = cfg.get("j", 2)
    suite = make_suite("mock", q)
    f = sample_polynomial(t, random.Random(seed), suite.q)
    C = commit(suite, f, G1)
    x = (f(j) + (1 if bad else 0)) % suite.q
    reg = SignatureRegistry(seed)
    truth = zeta_all(suite, C, j)

    def challenger(m, game):
        v = truth[m]
        return suite.mul(v, suite.g1) if m in lies else v

    outcome, game = run_dispute(suite, reg.sign(1, encode_commitments(suite, C)), reg.sign(1, encode_subshare(suite, j, x)),
                                C, j, x, reg, 1, challenger, honest_prover(suite, C, j))
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for turn in game.turns:
            _emit(turn, out)
        _emit({"event": "verdict", **outcome.to_dict(),
               "costs": {k: v.to_dict() for k, v in game.costs.items()}}, out)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_econ(args) -> int:
    if args.n is None or args.t is None or args.delta is None:
        raise ConfigError("econ-analyze needs --n, --t and --delta")
    try:
        params = economics.EconParams(args.R, args.delta, args.t, args.n, args.alpha,
                                      args.framing_reward or "full")
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    report = economics.analyze(params, args.max_investment)
    if args.sweep_csv:
        with open(args.sweep_csv, "w") as fh:
            fh.write(economics.sweep_csv(economics.split_sweep(params)))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(canonical_json(report) + "\n")
    _emit(report)
    return 0


def cmd_sweep(args) -> int:
    if not args.file:
        raise ConfigError("sweep needs --file")
    doc = _load_json(args.file)
    if isinstance(doc, list):
        scenarios = [Scenario.from_dict(d) for d in doc]
    else:
        base = _scenario_from(args)
        count = args.seeds or 1
        scenarios = [Scenario.from_dict({**base.to_dict(), "seed": base.seed + k}) for k in range(count)]
    summaries = sweep(scenarios, args.workers)
    for s in summaries:
        _emit(s)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(summary_csv(summaries))
    return 0 if all(s["outcome"] == "success" for s in summaries) else 1


COMMANDS = {
    "dkg-run": cmd_dkg_run,
    "beacon": cmd_beacon,
    "dispute-replay": cmd_dispute_replay,
    "econ-analyze": cmd_econ,
    "scenario": cmd_scenario,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.delta is not None:
            units(args.delta)
        return COMMANDS[args.command](args)
    except (ConfigError, ScenarioError, ValueError) as exc:
        print(f"escrowdkg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
