"""Energy-minimizing optimization for a RIS-assisted two-user cooperative RSMA downlink."""

from .config import SystemConfig
from .channels import ChannelSet, generate_channels, path_loss, sample_rayleigh, sample_rician
from .ratemodel import (PhaseVector, PowerSolution, RateReport, FeasibilityReport,
                        effective_channel, total_energy, check_feasibility)
from .aodriver import AOResult, ao_solve, delta_search
from .baselines import SchemeId, solve_scheme
from .harness import ExperimentSpec, ResultRow, run_experiment, summarize

__all__ = [
    "SystemConfig", "ChannelSet", "generate_channels", "path_loss",
    "sample_rayleigh", "sample_rician", "PhaseVector", "PowerSolution",
    "RateReport", "FeasibilityReport", "effective_channel", "total_energy",
    "check_feasibility", "AOResult", "ao_solve", "delta_search", "SchemeId",
    "solve_scheme", "ExperimentSpec", "ResultRow", "run_experiment",
    "summarize",
]

__version__ = "0.1.0"
