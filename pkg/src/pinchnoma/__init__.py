"""Antenna placement and power allocation for a pinching-antenna waveguide
serving a primary and a secondary user with cognitive-radio NOMA."""
from .baselines import OmaSolution, fixed_baseline, oma_solve
from .closedform import SingleAntennaSolution, check_tightness, feasible_n1, paper_closed_form_n1, solve_n1
from .harness import ExperimentSpec, TrialRecord, run_experiment, sample_deployment
from .model import (
    AntennaLayout,
    EffectiveChannels,
    PowerAllocation,
    SystemConfig,
    UserPair,
    effective_channel,
    noma_rates,
    oma_rate,
)
from .oracle import GridSpec, Solution, exhaustive_search, power_scan
from .power import PowerUpdateResult, optimal_power_split
from .sca import bcd_solve, linearize, newton_init, sca_solve

__all__ = [
    "AntennaLayout",
    "EffectiveChannels",
    "ExperimentSpec",
    "GridSpec",
    "OmaSolution",
    "PowerAllocation",
    "PowerUpdateResult",
    "SingleAntennaSolution",
    "Solution",
    "SystemConfig",
    "TrialRecord",
    "UserPair",
    "bcd_solve",
    "check_tightness",
    "effective_channel",
    "exhaustive_search",
    "feasible_n1",
    "fixed_baseline",
    "linearize",
    "newton_init",
    "noma_rates",
    "oma_rate",
    "oma_solve",
    "optimal_power_split",
    "paper_closed_form_n1",
    "power_scan",
    "run_experiment",
    "sample_deployment",
    "sca_solve",
    "solve_n1",
]
