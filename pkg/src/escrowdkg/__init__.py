"""Escrow-backed distributed key generation, threshold BLS beacon and incentive analysis."""
from .escrow_dkg import DkgConfig, EscrowDkg, Phase, run_escrow_dkg
from .eth_dkg import run_eth_dkg
from .group_suite import MockSuite, PairingSuite, make_suite
from .ped_dkg import run_ped_dkg
from .sim_harness import Scenario, differential_run, run_scenario

__all__ = [
    "DkgConfig", "EscrowDkg", "Phase", "run_escrow_dkg", "run_eth_dkg",
    "MockSuite", "PairingSuite", "make_suite", "run_ped_dkg",
    "Scenario", "differential_run", "run_scenario",
]
