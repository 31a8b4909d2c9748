"""Robust decision rules for an agent advised by a possibly misaligned adviser."""

from .binary_action import (AdversaryKernel, BinaryActionSolution, RelativePayoffDist,
                            rationalizing_adversary, solve_binary_action)
from .binary_trust import (SensitivityReport, TrustInterval, best_response_iteration,
                           cutoff_belief, psi_residuals, sensitivity_compare,
                           solve_trust_interval, worst_case_payoff)
from .core import (BeliefDensity, UtilityCurve, bregman_distance, density_moments,
                   worst_case_report)
from .errors import GenericityError, InputError, PreconditionError, SolverError
from .game import (FiniteGame, SaddleSolution, adviser_value, maximin_value, minimax_value,
                   solve_saddle, verify_trs_structure)
from .mva import (MvaSolution, SignalMatrix, construct_target_mva, signal_matrix_from_posteriors,
                  solve_mva)
from .runner import ExperimentConfig, run_experiment, verify_bundle
from .spherical import (RadialUtility, SphericalInstance, antipodal_report, solve_radius,
                        uniform_radius)
from .transport import TransportMap, build_tre_map, verify_posterior_consistency

__version__ = "0.1.0"

__all__ = [
    "AdversaryKernel", "BeliefDensity", "BinaryActionSolution", "ExperimentConfig",
    "FiniteGame", "GenericityError", "InputError", "MvaSolution", "PreconditionError",
    "RadialUtility", "RelativePayoffDist", "SaddleSolution", "SensitivityReport",
    "SignalMatrix", "SolverError", "SphericalInstance", "TransportMap", "TrustInterval",
    "UtilityCurve", "adviser_value", "antipodal_report", "best_response_iteration",
    "bregman_distance", "build_tre_map", "construct_target_mva", "cutoff_belief",
    "density_moments", "maximin_value", "minimax_value", "psi_residuals",
    "rationalizing_adversary", "run_experiment", "sensitivity_compare",
    "signal_matrix_from_posteriors", "solve_binary_action", "solve_mva", "solve_radius",
    "solve_saddle", "solve_trust_interval", "uniform_radius", "verify_bundle",
    "verify_posterior_consistency", "verify_trs_structure", "worst_case_payoff",
    "worst_case_report",
]
