"""Stationary states assembled from the chain decomposition.

The time average of a single trajectory depends only on the minimal
absorbing set B it is captured in:

* a set the trajectory keeps jumping through contributes the visit-weighted
  mean sojourn states, Θ_B = Σ_s q(Θ_s|B) Ī_s / Tr[...], and
* a trap sink contributes the long-time average of the no-jump drift of its
  trapping state.

Weighting each Θ_B by the probability of capture from ρ₀ yields the
stationary solution

    ρ^∞(ρ₀) = Σ_i P(B_i | ρ₀) · Θ_{B_i},

which is a fixed point of the generator; the Frobenius norm of ℒ(ρ^∞) is
reported as the residual.  When the no-jump drift does not change state
directions at all (H ∝ Id and Λ = β·Id) the sojourn weights cancel and the
assembly collapses to the classical embedded-chain average Σ_s q(Θ_s) Θ_s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    DEFAULT_MAX_STATES,
    DEFAULT_QUANTUM,
    ChainAnalysis,
    StateKind,
    TransitionChain,
    analyze_chain,
    build_chain,
)
from .errors import NotClassical, TrappingState, ZeroDenominator
from .linalg import frobenius, hermitize, require_density
from .model import TRAP_THRESHOLD, LindbladModel, apply_lindbladian, survival_limit
from .sojourn import SojournData, mean_sojourn_integral, trap_time_average

__all__ = [
    "SojournData",
    "mean_sojourn_integral",
    "cycle_steady_state",
    "trap_steady_state",
    "steady_state",
    "classical_steady_state",
    "AbsorbingSetResult",
    "SteadyStateResult",
]


@dataclass
class AbsorbingSetResult:
    """One minimal absorbing set: its states, stationary matrix and capture mass."""

    indices: tuple[int, ...]
    theta: np.ndarray
    capture: float


@dataclass
class SteadyStateResult:
    """ρ^∞ with the per-set decomposition it was assembled from."""

    rho_infinity: np.ndarray
    sets: list[AbsorbingSetResult]
    residual: float
    method_notes: dict
    chain: TransitionChain
    analysis: ChainAnalysis


def cycle_steady_state(model: LindbladModel, states_in_b, weights) -> np.ndarray:
    """Θ_B of a set the trajectory keeps jumping through.

    ``weights`` is the within-set stationary distribution q(·|B); the result
    is Σ_s q_s Ī_s normalized by its trace Σ_s q_s τ̄_s.
    """
    weights = np.asarray(weights, dtype=float)
    numerator = None
    for theta, w in zip(states_in_b, weights):
        if survival_limit(model, theta) > TRAP_THRESHOLD:
            raise TrappingState("a trapping state cannot belong to a jump cycle set")
        data = mean_sojourn_integral(model, theta)
        term = w * data.i_bar
        numerator = term if numerator is None else numerator + term
    denom = float(np.trace(numerator).real)
    if denom <= 1e-300:
        raise ZeroDenominator("all mean waiting times vanished; inconsistent input")
    return hermitize(numerator / denom)


def trap_steady_state(model: LindbladModel, theta_trap) -> np.ndarray:
    """Long-time average of the no-jump drift of a possible trapping state.

    In the eigenbasis of H_c only the zero-decay, equal-real-part entry pairs
    survive the time average (unequal real parts dephase to zero); the
    surviving block is renormalized by its trace.
    """
    avg, _q = trap_time_average(model, theta_trap)
    return avg


def steady_state(
    model: LindbladModel,
    rho0,
    *,
    max_states: int = DEFAULT_MAX_STATES,
    quantum: float = DEFAULT_QUANTUM,
    diagnostics: bool = False,
) -> SteadyStateResult:
    """Stationary state reached from ρ₀, by the chain-decomposition method.

    Propagates InfiniteStateSpace / TauDependentJump when the finite-chain
    method does not apply (callers should fall back to the oracle).
    """
    rho0 = require_density(rho0, what="rho0")
    chain = build_chain(model, rho0, max_states, quantum, diagnostics=diagnostics)
    analysis = analyze_chain(chain)

    sets = []
    rho = np.zeros((model.dim, model.dim), dtype=np.complex128)
    for b, dist, capture in zip(
        analysis.minimal_absorbing_sets,
        analysis.within_set_distributions,
        analysis.capture_probabilities,
    ):
        members = list(b)
        if len(members) == 1 and chain.states[members[0]].kind is StateKind.TRAP_SINK:
            theta_b = chain.states[members[0]].matrix
        else:
            theta_b = cycle_steady_state(
                model,
                [chain.states[s].matrix for s in members],
                dist[members],
            )
        sets.append(AbsorbingSetResult(indices=tuple(b), theta=theta_b, capture=float(capture)))
        rho += capture * theta_b
    rho = hermitize(rho)

    n_sinks = sum(1 for s in chain.states if s.kind is StateKind.TRAP_SINK)
    notes = {
        "propagation": "eigenbasis" if model.diagonalizable else "expm",
        "sojourn": "closed-form" if model.diagonalizable else "quadrature",
        "states": len(chain.states) - n_sinks,
        "trap_sinks": n_sinks,
        "absorbing_sets": len(sets),
        "max_states": max_states,
        "quantum": quantum,
    }
    return SteadyStateResult(
        rho_infinity=rho,
        sets=sets,
        residual=frobenius(apply_lindbladian(model, rho)),
        method_notes=notes,
        chain=chain,
        analysis=analysis,
    )


def classical_steady_state(
    model: LindbladModel,
    rho0,
    *,
    max_states: int = DEFAULT_MAX_STATES,
    quantum: float = DEFAULT_QUANTUM,
) -> np.ndarray:
    """Fast path for classical models (H ∝ Id, Λ = β·Id): ρ^∞ = Σ_s q(Θ_s) Θ_s.

    The no-jump drift is then a pure scale factor, every sojourn state equals
    Θ_s/β, and the stationary state is the embedded chain's stationary mixture
    of the post-jump states.  Raises NotClassical when the preconditions fail.
    """
    n = model.dim
    h0 = model.hamiltonian - (np.trace(model.hamiltonian) / n) * np.eye(n)
    if frobenius(h0) > 1e-10:
        raise NotClassical("Hamiltonian is not proportional to the identity")
    beta = float(np.trace(model.lam).real) / n
    if frobenius(model.lam - beta * np.eye(n)) > 1e-10:
        raise NotClassical("decay operator is not proportional to the identity")

    rho0 = require_density(rho0, what="rho0")
    chain = build_chain(model, rho0, max_states, quantum)
    analysis = analyze_chain(chain)
    occupation = np.zeros(chain.q.shape[0])
    for dist, capture in zip(analysis.within_set_distributions, analysis.capture_probabilities):
        occupation += capture * dist
    rho = np.zeros((n, n), dtype=np.complex128)
    for s, weight in enumerate(occupation):
        if weight > 0.0:
            rho += weight * chain.states[s].matrix
    return hermitize(rho)
