"""Optimal paths, growth profiles and Monte Carlo for branching Brownian motion in a |x|**p potential."""

__version__ = "0.1.0"

from .euler_lagrange import (DomainError, OptimalPathResult, SolverError, frontier,
                             solve_constrained, solve_unconstrained, z_bar)
from .model import ModelError, OffspringLaw, PotentialParams, branch_rate, reference_params, validate
from .profiles import (GrowthProfile, closed_form_z_hat, optimal_endpoint, tabulate_profile,
                       verify_profile_ode)
from .rate import SampledPath, extinction_time, presence_rate, rate_functional
from .sim import (CapacityExceeded, SimConfig, SimOutcome, SmoothPath, TubeSpec, growth_rate_estimate,
                  many_to_one_check, martingale_check, presence_probability, run_bbm,
                  tilted_spine_path, tube_count)

__all__ = [
    "CapacityExceeded", "DomainError", "GrowthProfile", "ModelError", "OffspringLaw",
    "OptimalPathResult", "PotentialParams", "SampledPath", "SimConfig", "SimOutcome", "SmoothPath",
    "SolverError", "TubeSpec", "branch_rate", "closed_form_z_hat", "extinction_time", "frontier",
    "growth_rate_estimate", "many_to_one_check", "martingale_check", "optimal_endpoint",
    "presence_probability", "presence_rate", "rate_functional", "reference_params", "run_bbm",
    "solve_constrained", "solve_unconstrained", "tabulate_profile", "tilted_spine_path",
    "tube_count", "validate", "verify_profile_ode", "z_bar",
]
