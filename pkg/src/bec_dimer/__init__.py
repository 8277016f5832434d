"""Quantum and mean-field dynamics of a two-mode condensate in a double well."""
from .dynamics import (NormDriftError, PropagationConfig, TrajectoryRecord, eom_residual, propagate,
                       transport_metrics)
from .meanfield import (BlochVector, GPAmplitudes, bloch_rhs, compare_quantum_classical, gp_rhs,
                        integrate_meanfield)
from .model import HamiltonianKind, ModelParams, Schedule, evaluate_schedule, hamiltonian_at, second_quantized_check
from .operators import OperatorSet, QuantumState, build_operators, expectation, left_well_state
from .wells import ModeFunctions, Potential, WellSpec, compute_parameters, solve_modes

__all__ = [
    "BlochVector", "GPAmplitudes", "HamiltonianKind", "ModeFunctions", "ModelParams", "NormDriftError",
    "OperatorSet", "Potential", "PropagationConfig", "QuantumState", "Schedule", "TrajectoryRecord", "WellSpec",
    "bloch_rhs", "build_operators", "compare_quantum_classical", "compute_parameters", "eom_residual",
    "evaluate_schedule", "expectation", "gp_rhs", "hamiltonian_at", "integrate_meanfield", "left_well_state",
    "propagate", "second_quantized_check", "solve_modes", "transport_metrics",
]
