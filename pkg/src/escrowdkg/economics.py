"""Two-entity collusion game, collusion-resistance conditions and robustness prices.

Two entities A and B hold a and b key shares (a + b >= t + 1), enough to
collude. Each either frames (reveals the collusion to the escrow and collects
the framing reward) or keeps quiet and splits the system value R in
proportion to its shares. All money is exact ``Fraction`` arithmetic.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

FRAME = "frame"
NOT_FRAME = "not_frame"
STRATEGIES = (FRAME, NOT_FRAME)


def _q(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def num(x):
    """JSON form of an exact amount: int when integral, else exact string plus float."""
    x = Fraction(x)
    if x.denominator == 1:
        return int(x)
    return {"exact": str(x), "float": float(x)}


@dataclass(frozen=True)
class EconParams:
    R: Fraction
    delta: Fraction
    t: int
    n: int
    alpha: Fraction = Fraction(0)
    framing_reward: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "R", _q(self.R))
        object.__setattr__(self, "delta", _q(self.delta))
        object.__setattr__(self, "alpha", _q(self.alpha))
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0 < self.t < self.n:
            raise ValueError("need 0 < t < n")
        if self.R < 0 or self.delta < 0:
            raise ValueError("monetary values must be non-negative")
        if self.framing_reward not in ("full", "half"):
            raise ValueError("framing_reward must be 'full' or 'half'")

    @property
    def framing_reward_amount(self) -> Fraction:
        full = self.t * self.delta
        return full if self.framing_reward == "full" else full / 2

    def scaled(self, k) -> EconParams:
        k = _q(k)
        return EconParams(self.R * k, self.delta * k, self.t, self.n, self.alpha, self.framing_reward)


@dataclass(frozen=True)
class PayoffMatrix:
    a: int
    b: int
    cells: dict  # (strategy_A, strategy_B) -> (payoff_A, payoff_B)
    quiet_share_bound: Fraction  # R/(t+1): most a quiet colluder can get per share

    def payoff(self, player: str, mine: str, theirs: str) -> Fraction:
        if player == "A":
            return self.cells[(mine, theirs)][0]
        return self.cells[(theirs, mine)][1]

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "cells": {f"{sa}/{sb}": [num(pa), num(pb)] for (sa, sb), (pa, pb) in self.cells.items()},
            "frame_frame": "expected value of a fair race to be processed first",
            "quiet_share_bound": num(self.quiet_share_bound),
        }


def payoff_matrix(a: int, b: int, params: EconParams) -> PayoffMatrix:
    t, d, R = params.t, params.delta, params.R
    if a < 1 or b < 1:
        raise ValueError("both entities need at least one share")
    if a + b <= t:
        raise ValueError(f"a + b = {a + b} <= t = {t}: the entities cannot collude")
    reward = params.framing_reward_amount
    frame_a, frame_b = reward - a * d, reward - b * d
    cells = {
        (FRAME, NOT_FRAME): (frame_a, -b * d),
        (NOT_FRAME, FRAME): (-a * d, frame_b),
        (NOT_FRAME, NOT_FRAME): (Fraction(a) * R / (a + b), Fraction(b) * R / (a + b)),
        (FRAME, FRAME): ((frame_a - a * d) / 2, (frame_b - b * d) / 2),
    }
    return PayoffMatrix(a, b, cells, R / (t + 1))


def dominant_strategy(matrix: PayoffMatrix) -> dict[str, str]:
    """Strictly dominant strategy per player, or "none"."""
    out = {}
    for player in ("A", "B"):
        out[player] = "none"
        for s in STRATEGIES:
            other = NOT_FRAME if s == FRAME else FRAME
            if all(matrix.payoff(player, s, r) > matrix.payoff(player, other, r) for r in STRATEGIES):
                out[player] = s
    return out


def brute_force_equilibrium(a: int, b: int, params: EconParams) -> list[tuple[str, str]]:
    """Pure-strategy Nash equilibria by checking every unilateral deviation."""
    m = payoff_matrix(a, b, params)
    eq = []
    for sa in STRATEGIES:
        for sb in STRATEGIES:
            best_a = all(m.cells[(sa, sb)][0] >= m.cells[(x, sb)][0] for x in STRATEGIES)
            best_b = all(m.cells[(sa, sb)][1] >= m.cells[(sa, y)][1] for y in STRATEGIES)
            if best_a and best_b:
                eq.append((sa, sb))
    return eq


def consistent(dominant: dict[str, str], equilibria) -> bool:
    """A strictly dominant strategy must be played in every equilibrium, and then equilibria exist."""
    for pos, player in enumerate(("A", "B")):
        s = dominant[player]
        if s != "none" and (not equilibria or any(e[pos] != s for e in equilibria)):
            return False
    return True


def split_sweep(params: EconParams, total: int | None = None) -> list[dict]:
    """Every split a + b = total (default t+1) with its dominance labels and equilibria."""
    total = params.t + 1 if total is None else total
    rows = []
    for a in range(1, total):
        b = total - a
        m = payoff_matrix(a, b, params)
        dom = dominant_strategy(m)
        eq = brute_force_equilibrium(a, b, params)
        rows.append({
            "a": a, "b": b, "dominant_A": dom["A"], "dominant_B": dom["B"],
            "equilibria": ";".join(f"{x}/{y}" for x, y in eq),
            "consistent": consistent(dom, eq),
        })
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def collusion_condition(params: EconParams) -> bool:
    """R < (t-1)Δ/2: strict, so equality fails."""
    return params.R < Fraction(params.t - 1) * params.delta / 2


def collusion_resistance_report(params: EconParams, max_investment=None) -> dict:
    t, d = params.t, params.delta
    threshold = Fraction(t + 1) * d / 2
    condition = collusion_condition(params)
    rows = split_sweep(params)
    small_side_frames = all(
        (r["dominant_A"] == FRAME if r["a"] < r["b"] else r["dominant_B"] == FRAME)
        for r in rows if min(r["a"], r["b"]) < Fraction(t + 1, 2)
    )
    report = {
        "R": num(params.R),
        "delta": num(d),
        "t": t,
        "n": params.n,
        "framing_reward": params.framing_reward,
        "condition_bound": num(Fraction(t - 1) * d / 2),
        "condition_holds": condition,
        "investment_threshold": num(threshold),
        "side_contract_bound": num(Fraction(3 * t - 1) * d / 4),
        "smaller_side_frames_in_every_split": small_side_frames,
    }
    verdict = condition
    if max_investment is not None:
        below = _q(max_investment) < threshold
        report["max_investment"] = num(_q(max_investment))
        report["no_two_entities_can_collude"] = below
        verdict = verdict and below
    report["collusion_resistant"] = verdict
    return report


def balanced_alpha(n: int, t: int) -> Fraction:
    return Fraction(2 * n * (n - t), t * t)


def robustness_report(params: EconParams) -> dict:
    t, n, d, R, alpha = params.t, params.n, params.delta, params.R, params.alpha
    ba = balanced_alpha(n, t)
    return {
        "fail_dkg_price": num(d / 2),
        "self_framing_forgone_rewards": num(Fraction(t + 1) * alpha * R / n),
        "self_framing_burned_deposits": num((n - t) * d),
        "noncooperation_price": num((n - t) * d),
        "balanced_alpha": num(ba),
        "balanced_alpha_rounded": round(float(ba), 2),
        "roi": num(alpha * R / (n * d)) if d else None,
    }


def analyze(params: EconParams, max_investment=None) -> dict:
    collusion = collusion_resistance_report(params, max_investment)
    return {
        "collusion_resistant": collusion["collusion_resistant"],
        "collusion": collusion,
        "robustness": robustness_report(params),
    }
