"""Ground-state energies of positive and negative Hopfield forms.

Exact small-n solving, greedy bit-fixing, dominant-eigenvector rounding, the greedy
performance recursions, closed-form bounds and a seeded experiment harness.
"""
from .analytic import BoundSet, RecursionTrace, bounds, recursion, recursion_limit
from .core import (Algorithm, Ensemble, EnergyReport, Form, ProblemInstance, energy, load_matrix,
                   make_instance, mix_seed, sample_instance, save_matrix)
from .exact import ExactSolution, FreeEnergyPoint, free_energy, solve_exact, solve_exact_naive
from .experiment import ExperimentConfig, ExperimentResult, run_experiment, serialize_result
from .greedy import GreedyTrace, greedy_mean_estimate, greedy_solve
from .spectral import SpectralResult, eigen_solve, top_eigenpair

__version__ = "0.1.0"

__all__ = [
    "Algorithm", "BoundSet", "Ensemble", "EnergyReport", "ExactSolution", "ExperimentConfig",
    "ExperimentResult", "Form", "FreeEnergyPoint", "GreedyTrace", "ProblemInstance",
    "RecursionTrace", "SpectralResult", "bounds", "eigen_solve", "energy", "free_energy",
    "greedy_mean_estimate", "greedy_solve", "load_matrix", "make_instance", "mix_seed",
    "recursion", "recursion_limit", "run_experiment", "sample_instance", "save_matrix",
    "serialize_result", "solve_exact", "solve_exact_naive", "top_eigenpair",
]
