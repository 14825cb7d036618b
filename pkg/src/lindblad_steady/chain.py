"""The discrete Markov chain of post-jump states.

The sequence of post-jump states of a quantum trajectory is a Markov chain:
the normalized target of a jump through channel k is independent of the
waiting time (a hypothesis this module verifies), so from a finite set of
states the trajectory hops with probabilities

    P(Θ_src → Θ_dst) = Σ_{k: J_k maps src to dst} ∫₀^∞ γ_k Tr[V_k U_τ(Θ_src) V_k†] dτ,

and a possible trapping state additionally points at an artificial *trap
sink* — an absorbing node carrying the long-time average of its no-jump
drift — with probability equal to its survival limit.  Columns of the
resulting matrix Q (column-stochastic, Q[i, j] = P(j → i)) then sum to one.

Long-run behaviour is read off the state-transition network: the minimal
absorbing sets are the strongly connected components without outgoing edges,
the within-set visit frequencies are the stationary distribution of the
restricted chain (computed from principal minors of Q_B - Id, the
matrix-tree/in-tree formula), and the capture probabilities solve the
absorbing-chain linear system.  A Cesàro power average (1/K)Σ Q^k q₀ provides
an independent cross-check of the whole decomposition.

State enumeration is breadth-first closure under all jump maps, with states
deduplicated on a quantized grid.  Two failure modes are detected and raised
rather than approximated: closure exceeding the state budget
(InfiniteStateSpace) and waiting-time-dependent jump targets
(TauDependentJump); in both cases the finite-chain method does not apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from .errors import (
    ColumnSumViolation,
    InfiniteStateSpace,
    NonConvergence,
    SingularRestriction,
    SingularTransientBlock,
    TauDependentJump,
)
from .linalg import StateRegistry, as_matrix, hermitize, require_density
from .model import TRAP_THRESHOLD, LindbladModel, conditional_propagate, survival_limit
from .sojourn import channel_flux, channel_flux_quadrature, trap_time_average

DEFAULT_MAX_STATES = 256
DEFAULT_QUANTUM = 1e-9
#: Fixed multiples of 1/γ_min probing the τ-independence of jump targets.
PROBE_MULTIPLES = (0.1, 0.7, 2.3, 5.9)
#: Transition probabilities at or below this value are numerical noise, not edges.
EDGE_TOL = 1e-12


class StateKind(Enum):
    POST_JUMP = "post-jump"
    TRAP_SINK = "trap-sink"


@dataclass
class ChainState:
    """Node of the chain: a post-jump density matrix or a trap-sink average.

    ``origins`` lists the trapping post-jump states feeding a sink; sinks are
    merged when their trap averages coincide on the deduplication grid (in the
    amplitude-damping example two trapping states share one sink).
    """

    kind: StateKind
    matrix: np.ndarray
    origins: tuple[int, ...] = ()


@dataclass
class TransitionChain:
    """Column-stochastic chain over ChainStates; state 0 is ρ₀."""

    states: list[ChainState]
    q: np.ndarray
    edge_channels: dict[tuple[int, int], frozenset[int]]
    initial: np.ndarray


@dataclass
class ChainAnalysis:
    """Minimal absorbing sets with their stationary data.

    ``within_set_distributions`` are full-length probability vectors supported
    on the corresponding set; ``capture_probabilities`` sum to one.
    """

    minimal_absorbing_sets: list[tuple[int, ...]]
    within_set_distributions: list[np.ndarray]
    capture_probabilities: np.ndarray


@dataclass
class _Enumeration:
    states: list[ChainState]
    edge_channels: dict[tuple[int, int], frozenset[int]] = field(default_factory=dict)
    edge_prob: dict[tuple[int, int], float] = field(default_factory=dict)
    trap_mass: dict[int, float] = field(default_factory=dict)
    sink_of: dict[int, int] = field(default_factory=dict)
    flux_by_state: dict[int, np.ndarray] = field(default_factory=dict)


def _probe_times(model: LindbladModel) -> np.ndarray:
    scale = 1.0 / model.gamma_min if model.gamma_min else 1.0
    return np.array(PROBE_MULTIPLES) * scale


def _jump_target(model, theta, k, probes, registry, state_index):
    """Normalized jump target through channel k, verified τ-independent."""
    v = model.channels[k].v
    raws = [v @ conditional_propagate(model, theta, t) @ v.conj().T for t in probes]
    traces = np.array([float(np.trace(r).real) for r in raws])
    w_max = traces.max()
    if w_max <= 0.0:
        raise NonConvergence(
            f"channel {k} has positive flux but vanishing probe traces from state {state_index}"
        )
    targets = [hermitize(raws[i] / traces[i]) for i in range(len(probes)) if traces[i] > 1e-12 * w_max]
    probe_registry = StateRegistry(registry.quantum)
    if len({probe_registry.add(t) for t in targets}) > 1:
        raise TauDependentJump(
            f"jump target of channel {k} from state {state_index} depends on the waiting time",
            state_index=state_index,
            channel=k,
        )
    return hermitize(raws[int(np.argmax(traces))] / w_max)


def _enumerate(model: LindbladModel, rho0, max_states: int, quantum: float) -> _Enumeration:
    rho0 = require_density(rho0, what="rho0")
    registry = StateRegistry(quantum)
    registry.add(rho0)
    probes = _probe_times(model)
    enum = _Enumeration(states=[])
    explored = 0
    while explored < len(registry):
        s = explored
        explored += 1
        theta = registry.matrices[s]
        flux = channel_flux(model, theta)
        enum.flux_by_state[s] = flux
        q = survival_limit(model, theta)
        if q > TRAP_THRESHOLD:
            enum.trap_mass[s] = q
        for k, p_k in enumerate(flux):
            if p_k <= EDGE_TOL:
                continue
            target = _jump_target(model, theta, k, probes, registry, s)
            dst = registry.add(target)
            if len(registry) > max_states:
                raise InfiniteStateSpace(
                    f"state closure exceeded max_states={max_states}; "
                    "the post-jump state space is not finite at this resolution",
                    n_states=len(registry),
                )
            edge = (s, dst)
            enum.edge_channels[edge] = frozenset(enum.edge_channels.get(edge, frozenset()) | {k})
            enum.edge_prob[edge] = enum.edge_prob.get(edge, 0.0) + float(p_k)

    enum.states = [ChainState(StateKind.POST_JUMP, m) for m in registry.matrices]

    # One sink per trapping state, merged when the trap averages collide.
    sink_registry = StateRegistry(quantum)
    sink_index: dict[int, int] = {}
    sink_origins: dict[int, list[int]] = {}
    for s in sorted(enum.trap_mass):
        avg, _q = trap_time_average(model, registry.matrices[s])
        j = sink_registry.add(avg)
        sink_origins.setdefault(j, []).append(s)
        sink_index[s] = j
    n_post = len(enum.states)
    for j, matrix in enumerate(sink_registry.matrices):
        enum.states.append(
            ChainState(StateKind.TRAP_SINK, matrix, origins=tuple(sink_origins[j]))
        )
    enum.sink_of = {s: n_post + j for s, j in sink_index.items()}
    return enum


def enumerate_states(
    model: LindbladModel,
    rho0,
    max_states: int = DEFAULT_MAX_STATES,
    quantum: float = DEFAULT_QUANTUM,
) -> tuple[list[ChainState], dict[tuple[int, int], frozenset[int]]]:
    """Closure of ρ₀ under all jump maps, plus trap sinks for trapping states."""
    enum = _enumerate(model, rho0, max_states, quantum)
    return enum.states, enum.edge_channels


def transition_probability(model: LindbladModel, theta_src, channels_to_dst) -> float:
    """P(src → dst) = Σ_{k ∈ I(src→dst)} ∫₀^∞ f^(k)(τ | Θ_src) dτ."""
    flux = channel_flux(model, as_matrix(theta_src))
    return float(sum(flux[k] for k in channels_to_dst))


def build_chain(
    model: LindbladModel,
    rho0,
    max_states: int = DEFAULT_MAX_STATES,
    quantum: float = DEFAULT_QUANTUM,
    *,
    diagnostics: bool = False,
) -> TransitionChain:
    """Assemble the complete (trap-sink-augmented) transition matrix from ρ₀."""
    enum = _enumerate(model, rho0, max_states, quantum)
    n = len(enum.states)
    q = np.zeros((n, n))
    for (src, dst), p in enum.edge_prob.items():
        q[dst, src] += p
    for src, mass in enum.trap_mass.items():
        q[enum.sink_of[src], src] += mass
    for j, state in enumerate(enum.states):
        if state.kind is StateKind.TRAP_SINK:
            q[j, j] = 1.0

    if diagnostics and model.diagonalizable:
        for s, flux in enum.flux_by_state.items():
            reference = channel_flux_quadrature(model, enum.states[s].matrix)
            if np.max(np.abs(flux - reference)) > 1e-8:
                raise NonConvergence(
                    f"closed-form channel fluxes of state {s} disagree with quadrature"
                )

    sums = q.sum(axis=0)
    bad = np.abs(sums - 1.0) > 1e-6
    if np.any(bad):
        raise ColumnSumViolation(
            f"columns {np.flatnonzero(bad)} sum to {sums[bad]} (integral vs limit inconsistency)"
        )
    q /= sums
    initial = np.zeros(n)
    initial[0] = 1.0
    return TransitionChain(states=enum.states, q=q, edge_channels=enum.edge_channels, initial=initial)


def minimal_absorbing_sets(q: np.ndarray) -> list[tuple[int, ...]]:
    """Strongly connected components with no outgoing edges (condensation sinks)."""
    q = np.asarray(q)
    n = q.shape[0]
    adjacency = scipy.sparse.csr_matrix((q.T > 0.0).astype(np.int8))
    n_comp, labels = connected_components(adjacency, directed=True, connection="strong")
    sets = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        outgoing = q[np.ix_(np.setdiff1d(np.arange(n), members), members)]
        if outgoing.size == 0 or not np.any(outgoing > 0.0):
            sets.append(tuple(int(i) for i in members))
    return sorted(sets, key=lambda b: b[0])


def stationary_within_set(q: np.ndarray, b) -> np.ndarray:
    """Stationary distribution of Q restricted to a minimal absorbing set.

    Matrix-tree form: component i is the principal minor of Γ = Q_B - Id with
    row and column i removed, normalized to sum one.
    """
    b = list(b)
    qb = np.asarray(q)[np.ix_(b, b)]
    if np.max(np.abs(qb.sum(axis=0) - 1.0)) > 1e-9:
        raise ValueError("the given set is not absorbing: its columns leak probability")
    nb = len(b)
    if nb == 1:
        return np.array([1.0])
    gamma = qb - np.eye(nb)
    keep = np.arange(nb)
    minors = np.array(
        [np.linalg.det(gamma[np.ix_(keep != i, keep != i)]) for i in range(nb)]
    )
    total = minors.sum()
    scale = np.max(np.abs(minors))
    if scale <= 0.0 or abs(total) <= 1e-14 * nb * scale:
        raise SingularRestriction("restricted chain has a kernel of dimension > 1")
    v = minors / total
    if v.min() < -1e-9:
        raise SingularRestriction(f"tree-formula weights came out negative: {v}")
    v = np.clip(v, 0.0, None)
    v /= v.sum()
    if np.max(np.abs(gamma @ v)) > 1e-9:
        raise SingularRestriction("minor-based stationary vector fails the residual check")
    return v


def enumerate_in_trees(weights: np.ndarray, root: int) -> list[tuple[tuple[int, int], ...]]:
    """All spanning in-trees rooted at ``root`` of a weighted digraph.

    ``weights[i, j]`` is the strength of edge i → j; zero means no edge and
    self-loops are ignored.  Exponential in general; intended as the explicit
    oracle for :func:`stationary_within_set` on small sets.
    """
    weights = np.asarray(weights)
    n = weights.shape[0]
    others = [v for v in range(n) if v != root]
    out_edges = {v: [u for u in range(n) if u != v and weights[v, u] > 0.0] for v in others}
    trees: list[tuple[tuple[int, int], ...]] = []
    parent: dict[int, int] = {}

    def creates_cycle(v: int, u: int) -> bool:
        node = u
        while node in parent:
            node = parent[node]
            if node == v:
                return True
        return False

    def extend(i: int) -> None:
        if i == len(others):
            trees.append(tuple(sorted((v, parent[v]) for v in others)))
            return
        v = others[i]
        for u in out_edges[v]:
            if not creates_cycle(v, u):
                parent[v] = u
                extend(i + 1)
                del parent[v]

    extend(0)
    return trees


def in_tree_stationary(weights: np.ndarray) -> np.ndarray:
    """Stationary vector by explicit in-tree enumeration (Σ of edge-weight products)."""
    weights = np.asarray(weights)
    n = weights.shape[0]
    sums = np.zeros(n)
    for root in range(n):
        for tree in enumerate_in_trees(weights, root):
            sums[root] += float(np.prod([weights[i, j] for i, j in tree]))
    total = sums.sum()
    if total <= 0.0:
        raise SingularRestriction("graph admits no spanning in-trees")
    return sums / total


def capture_probabilities(q: np.ndarray, sets=None, initial=None) -> np.ndarray:
    """P(absorption into each minimal set | initial distribution).

    Solved through the absorbing-chain fundamental matrix: with T the
    transient block of Q, the hitting probabilities satisfy
    h = r + Tᵀ h.  Equivalent to the generalized-eigenbasis expansion of the
    initial vector but without computing a Jordan basis.
    """
    q = np.asarray(q)
    n = q.shape[0]
    if sets is None:
        sets = minimal_absorbing_sets(q)
    if initial is None:
        initial = np.zeros(n)
        initial[0] = 1.0
    initial = np.asarray(initial, dtype=float)
    absorbed = set().union(*sets) if sets else set()
    transient = np.array([i for i in range(n) if i not in absorbed], dtype=int)
    captures = np.empty(len(sets))
    if transient.size:
        m = q[np.ix_(transient, transient)]
        a = np.eye(transient.size) - m.T
        if np.linalg.cond(a) > 1e12:
            raise SingularTransientBlock(
                "transient block is singular: a recurrent class was misclassified as transient"
            )
        lu_piv = scipy.linalg.lu_factor(a)
    for i, b in enumerate(sets):
        b = list(b)
        value = float(initial[b].sum())
        if transient.size:
            r = q[np.ix_(b, transient)].sum(axis=0)
            h = scipy.linalg.lu_solve(lu_piv, r)
            value += float(initial[transient] @ h)
        captures[i] = value
    return np.clip(captures, 0.0, 1.0)


def power_average(q: np.ndarray, q0: np.ndarray, k: int) -> np.ndarray:
    """Cesàro power average (1/K) Σ_{j<K} Q^j q₀ (computed by binary doubling)."""
    if k < 1:
        raise ValueError("K must be at least 1")
    q = np.asarray(q)

    def rec(j: int):
        if j == 0:
            return np.zeros_like(q), np.eye(q.shape[0])
        if j % 2:
            s, p = rec(j - 1)
            return s + p, p @ q
        s, p = rec(j // 2)
        return s + p @ s, p @ p

    total, _ = rec(k)
    return (total @ np.asarray(q0, dtype=float)) / k


def analyze_chain(chain: TransitionChain) -> ChainAnalysis:
    """Minimal absorbing sets, within-set distributions and capture probabilities."""
    sets = minimal_absorbing_sets(chain.q)
    dists = []
    for b in sets:
        v = stationary_within_set(chain.q, b)
        full = np.zeros(chain.q.shape[0])
        full[list(b)] = v
        dists.append(full)
    captures = capture_probabilities(chain.q, sets, chain.initial)
    return ChainAnalysis(
        minimal_absorbing_sets=sets,
        within_set_distributions=dists,
        capture_probabilities=captures,
    )


def to_dot(chain: TransitionChain) -> str:
    """GraphViz DOT rendering of the state-transition network."""
    lines = ["digraph chain {"]
    for i, state in enumerate(chain.states):
        lines.append(f'  s{i} [label="{i}: {state.kind.value}"];')
    n = chain.q.shape[0]
    for j in range(n):
        for i in range(n):
            if chain.q[i, j] > 0.0:
                lines.append(f'  s{j} -> s{i} [label="{chain.q[i, j]:.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
