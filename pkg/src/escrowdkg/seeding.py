"""Deterministic per-purpose random streams derived from one scenario seed.

Every protocol draws participant i's polynomial from the same stream, so
Ped-DKG, Escrow-DKG and Eth-DKG runs with equal seeds share their f_i.
"""
from __future__ import annotations

import random

from .group_suite import digest
from .secret_sharing import Polynomial, sample_polynomial


def derive_rng(seed: int, *labels) -> random.Random:
    tag = "|".join(str(x) for x in (seed, *labels)).encode()
    return random.Random(int.from_bytes(digest(tag), "big"))


def participant_polynomial(seed: int, index: int, t: int, q: int) -> Polynomial:
    return sample_polynomial(t, derive_rng(seed, "poly", index), q)
