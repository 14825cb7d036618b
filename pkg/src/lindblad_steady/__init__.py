"""Stationary states of the Lindblad equation via the quantum-jump chain method.

The library computes ρ^∞(ρ₀) three independent ways and cross-validates them:

* chain method (:func:`steady_state`): enumerate the finite set of post-jump
  states, analyze the resulting absorbing Markov chain, and assemble the
  stationary state from mean sojourn integrals and trap averages;
* Liouvillian oracle (:mod:`lindblad_steady.oracle`): spectral projection of
  the vectorized generator, plus direct RK45 integration;
* Monte Carlo (:mod:`lindblad_steady.unraveling`): quantum-jump trajectory
  ensembles whose average reconstructs ρ(t).
"""

from . import errors
from .chain import (
    ChainAnalysis,
    ChainState,
    StateKind,
    TransitionChain,
    analyze_chain,
    build_chain,
    capture_probabilities,
    enumerate_in_trees,
    enumerate_states,
    in_tree_stationary,
    minimal_absorbing_sets,
    power_average,
    stationary_within_set,
    to_dot,
    transition_probability,
)
from .linalg import (
    CanonicalKey,
    Spectrum,
    StateRegistry,
    Tolerances,
    ValidationReport,
    canonical_key,
    spectral_decompose,
    validate_density,
)
from .model import (
    TRAP_THRESHOLD,
    Channel,
    LindbladModel,
    apply_lindbladian,
    build_model,
    conditional_propagate,
    liouvillian_matrix,
    survival,
    survival_limit,
)
from .oracle import TimeSeries, cesaro_steady, integrate, null_space_steady, running_average
from .steady import (
    AbsorbingSetResult,
    SojournData,
    SteadyStateResult,
    classical_steady_state,
    cycle_steady_state,
    mean_sojourn_integral,
    steady_state,
    trap_steady_state,
)
from .unraveling import (
    EnsembleEstimate,
    Trajectory,
    channel_weights,
    ensemble_average,
    jump,
    sample_waiting_time,
    simulate_trajectory,
    state_at,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Channel",
    "LindbladModel",
    "build_model",
    "apply_lindbladian",
    "liouvillian_matrix",
    "conditional_propagate",
    "survival",
    "survival_limit",
    "TRAP_THRESHOLD",
    "Tolerances",
    "ValidationReport",
    "validate_density",
    "Spectrum",
    "spectral_decompose",
    "CanonicalKey",
    "canonical_key",
    "StateRegistry",
    "TimeSeries",
    "integrate",
    "running_average",
    "cesaro_steady",
    "null_space_steady",
    "Trajectory",
    "EnsembleEstimate",
    "sample_waiting_time",
    "channel_weights",
    "jump",
    "simulate_trajectory",
    "state_at",
    "ensemble_average",
    "ChainState",
    "StateKind",
    "TransitionChain",
    "ChainAnalysis",
    "enumerate_states",
    "transition_probability",
    "build_chain",
    "minimal_absorbing_sets",
    "stationary_within_set",
    "enumerate_in_trees",
    "in_tree_stationary",
    "capture_probabilities",
    "power_average",
    "analyze_chain",
    "to_dot",
    "SojournData",
    "mean_sojourn_integral",
    "cycle_steady_state",
    "trap_steady_state",
    "steady_state",
    "classical_steady_state",
    "AbsorbingSetResult",
    "SteadyStateResult",
]
