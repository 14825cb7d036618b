"""Shared model builders for the test suite.

The three two-level fixtures (amplitude exchange, dephasing projector,
amplitude damping) follow the worked examples of the jump-chain construction;
the counterexample model generates an infinite family of post-jump states.

The counterexample's second operator is [[0, 1/2], [0, 1/2]]: this is the
(column-consistent) form matching Λ = diag(γ₁, (γ₁+γ₂)/2) and the published
state family; with γ₁ = γ₂ the decay operator is proportional to the identity
so jump targets stay τ-independent while the V₁ orbit never closes.  The
variant with the columns swapped has Λ = diag(γ₁+γ₂/2, γ₁/2), which shears
states between jumps and makes targets τ-dependent instead.

In the dephasing fixture the paper's printed transition matrix assigns the
jump mass ρ₁₁(0) to diag(0,1); direct computation (and the Liouvillian
oracle) put the jump mass on the projector outcome diag(1,0) and the trap
mass ρ₂₂(0) on diag(0,1) — the tests assert the derived assignment.
"""

import numpy as np

import lindblad_steady as ls

RHO_GENERIC = np.array([[0.3, 0.2 + 0.1j], [0.2 - 0.1j, 0.7]], dtype=complex)

V_LOWER = np.array([[0, 0], [1, 0]], dtype=complex)  # maps e1 -> e2
V_RAISE = np.array([[0, 1], [0, 0]], dtype=complex)  # maps e2 -> e1
V_PROJ = np.array([[1, 0], [0, 0]], dtype=complex)


def example_a(g1=1.0, g2=1.0, h_scale=0.0):
    """Both directions of population exchange; Λ = diag(γ₁, γ₂), never trapping."""
    h = h_scale * np.eye(2, dtype=complex)
    return ls.build_model(h, [ls.Channel(V_LOWER, g1), ls.Channel(V_RAISE, g2)])


def example_b(g1=1.0, h_scale=0.0):
    """Projector channel; Λ = diag(γ₁, 0), generic states are possible traps."""
    h = h_scale * np.eye(2, dtype=complex)
    return ls.build_model(h, [ls.Channel(V_PROJ, g1)])


def example_c(g1=1.0, h_scale=0.0):
    """Amplitude damping; one jump at most, one minimal absorbing set."""
    h = h_scale * np.eye(2, dtype=complex)
    return ls.build_model(h, [ls.Channel(V_LOWER, g1)])


def infinite_chain_model(g=1.0):
    """Counterexample with an infinite post-jump state family (Λ = γ·Id)."""
    v1 = np.diag([1.0, 2.0 ** -0.5]).astype(complex)
    v2 = np.array([[0, 0.5], [0, 0.5]], dtype=complex)
    return ls.build_model(np.zeros((2, 2)), [ls.Channel(v1, g), ls.Channel(v2, g)])


def infinite_chain_model_printed(g=1.0):
    """Column-swapped variant: Λ not ∝ Id, so jump targets become τ-dependent."""
    v1 = np.diag([1.0, 2.0 ** -0.5]).astype(complex)
    v2 = np.array([[0.5, 0], [0.5, 0]], dtype=complex)
    return ls.build_model(np.zeros((2, 2)), [ls.Channel(v1, g), ls.Channel(v2, g)])


def defective_model():
    """Driven decaying qubit at its exceptional point: H_c has a Jordan block.

    H = σ_x, Λ = diag(4, 0): H_c = [[-2i, 1], [1, 0]] with double eigenvalue -i.
    """
    h = np.array([[0, 1], [1, 0]], dtype=complex)
    v = np.diag([2.0, 0.0]).astype(complex)
    return ls.build_model(h, [ls.Channel(v, 1.0)])


def three_level_trap(e2=0.7, e3=1.9, gamma=1.0):
    """One decaying level feeding a two-level trap block with energies e2, e3.

    Coherences inside the trap block dephase away in the time average unless
    e2 == e3.
    """
    h = np.diag([0.0, e2, e3]).astype(complex)
    v = np.zeros((3, 3), dtype=complex)
    v[1, 0] = 1.0  # decay level 1 -> level 2
    return ls.build_model(h, [ls.Channel(v, gamma)])


def random_density(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(rng, n):
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    return x / np.linalg.norm(x)


def random_rank_one_model(rng, n, n_channels=None):
    """Random Hermitian H with rank-one channels |a⟩⟨b|.

    Rank-one jumps land on the fixed pure state |a⟩⟨a| whatever the source,
    so the post-jump chain always closes.
    """
    if n_channels is None:
        n_channels = n
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (x + x.conj().T)
    channels = []
    for _ in range(n_channels):
        a = random_unit_vector(rng, n)
        b = random_unit_vector(rng, n)
        channels.append(ls.Channel(np.outer(a, b.conj()), float(rng.uniform(0.5, 2.0))))
    return ls.build_model(h, channels)


def random_classical_model(rng, n, beta=1.0):
    """H = 0, one channel per basis direction with unit-norm targets: Λ = β·Id."""
    channels = []
    for k in range(n):
        a = random_unit_vector(rng, n)
        v = np.zeros((n, n), dtype=complex)
        v[:, k] = a
        channels.append(ls.Channel(v, beta))
    return ls.build_model(np.zeros((n, n)), channels)
