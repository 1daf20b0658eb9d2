"""Entropic measurement uncertainty: incompatibility degree, error/disturbance
coefficient and their bounds for finite-dimensional quantum observables."""

__version__ = "0.1.0"

from .linalg_core import LinalgError
from .quantum_objects import (BiObservable, Instrument, MultiObservable, Observable, ObjectError,
                              ProbabilityDistribution, State, marginal, noisy_version,
                              sequential_measurement)
from .entropy import error_function, error_function_multi, rel_entropy, shannon
from .minimax_solver import (Bracket, SolverConfig, divergence, iad, icomp, icomp_multi,
                             max_over_states)

__all__ = [
    "__version__", "LinalgError", "ObjectError",
    "ProbabilityDistribution", "State", "Observable", "BiObservable", "MultiObservable",
    "Instrument", "marginal", "noisy_version", "sequential_measurement",
    "rel_entropy", "shannon", "error_function", "error_function_multi",
    "SolverConfig", "Bracket", "icomp", "icomp_multi", "iad", "max_over_states", "divergence",
]
