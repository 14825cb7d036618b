"""Monte Carlo quantum-jump trajectories.

A trajectory alternates deterministic no-jump drift with jumps: given the
current state Θ, the waiting time τ has distribution P(τ < T | Θ) =
1 - Tr U_T(Θ), sampled by the inversion method (draw η uniform, solve
Tr U_τ(Θ) = 1 - η; when η falls above the jump mass 1 - lim Tr U_t the
trajectory never jumps again and is trapped).  The firing channel is drawn
proportionally to f^(k)(τ|Θ) = γ_k Tr[V_k U_τ(Θ) V_k†] and the state after
the jump is V_k U_τ(Θ) V_k† renormalized.  Averaging many trajectories
reconstructs the master-equation solution ρ(t).

Waiting times are inverted by safeguarded bisection (the survival function is
monotone), doubling the bracket until it straddles the target and then taking
80 bisection steps.  Per-trajectory randomness comes from counter-based
Philox streams keyed by (seed, trajectory index), so ensembles are
reproducible and embarrassingly parallel; partial sums are merged in a fixed
chunk order with compensated summation, making the result independent of the
worker count.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AllWeightsZero, RootNotBracketed, ZeroTrace
from .linalg import as_matrix, canonical_key, hermitize, require_density
from .model import (
    TRAP_THRESHOLD,
    LindbladModel,
    conditional_propagate,
    survival,
    survival_limit,
    survival_terms,
)

#: Waiting time returned for the probability-zero draw η = 0 (keeps jump
#: ordering strict; τ = 0 would break the renewal bookkeeping).
EPS_TIME = 1e-12
BISECTION_STEPS = 80
_MAX_DOUBLINGS = 200
_CHUNK = 256
_CACHE_LIMIT = 4096


@dataclass
class Trajectory:
    """One realized quantum trajectory on [0, t_max].

    ``jump_times``, ``channels`` and ``post_jump_states`` record the n-th jump
    (ascending times); ``trapped`` marks a trajectory whose final waiting time
    was infinite, with ``trap_entry_time`` the time of its last jump.
    """

    initial_state: np.ndarray
    t_max: float
    jump_times: np.ndarray
    channels: np.ndarray
    post_jump_states: list[np.ndarray]
    trapped: bool
    trap_entry_time: float | None


@dataclass
class EnsembleEstimate:
    """Pointwise trajectory average with entrywise-aggregated standard error."""

    times: np.ndarray
    mean: list[np.ndarray]
    stderr: np.ndarray
    n_trajectories: int


class _StateSampler:
    """Cached survival data of one state: fast Tr U_t(Θ) and its limit.

    The exponential-mixture terms are held as plain Python complex pairs;
    for the tiny matrices this package targets that beats numpy call overhead
    several-fold in the bisection loop.
    """

    def __init__(self, model: LindbladModel, theta: np.ndarray):
        terms = survival_terms(model, theta)
        if terms is not None:
            coeff, expo, self.q = terms
            self._pairs = [(complex(c), complex(z)) for c, z in zip(coeff, expo)]
        else:
            self.q = survival_limit(model, theta)
            self._pairs = None
        self._model = model
        self._theta = theta

    def survival(self, t: float) -> float:
        if self._pairs is not None:
            total = 0.0
            for c, z in self._pairs:
                total += (c * cmath.exp(z * t)).real
            return total
        return survival(self._model, self._theta, t)

    def invert(self, target: float, t_scale: float) -> float:
        """Smallest τ with Tr U_τ(Θ) = target, by doubling + bisection."""
        hi = t_scale
        for _ in range(_MAX_DOUBLINGS):
            if self.survival(hi) <= target:
                break
            hi *= 2.0
        else:
            raise RootNotBracketed(f"survival never dropped below {target}")
        lo = 0.0
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if self.survival(mid) > target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def sample_waiting_time(model: LindbladModel, theta, eta: float) -> float:
    """Inversion-method waiting time; math.inf when η exceeds the jump mass."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    theta = as_matrix(theta)
    sampler = _StateSampler(model, theta)
    if eta >= 1.0 - sampler.q:
        return math.inf
    if eta == 0.0:
        return EPS_TIME
    t_scale = 1.0 / model.gamma_min if model.gamma_min else 1.0
    return sampler.invert(1.0 - eta, t_scale)


def channel_weights(model: LindbladModel, theta, tau: float) -> np.ndarray:
    """Unnormalized channel densities f^(k)(τ|Θ) = γ_k Tr[V_k U_τ(Θ) V_k†]."""
    u = conditional_propagate(model, as_matrix(theta), tau)
    weights = np.array(
        [ch.gamma * float(np.trace(ch.v @ u @ ch.v.conj().T).real) for ch in model.channels]
    )
    weights = np.clip(weights, 0.0, None)
    if weights.sum() <= 1e-300:
        raise AllWeightsZero(f"no channel can fire from this state at tau={tau}")
    return weights


def jump(model: LindbladModel, theta, tau: float, k: int) -> np.ndarray:
    """Post-jump state: V_k U_τ(Θ) V_k† normalized to unit trace."""
    u = conditional_propagate(model, as_matrix(theta), tau)
    v = model.channels[k].v
    raw = v @ u @ v.conj().T
    tr = float(np.trace(raw).real)
    if tr <= 1e-14 * max(float(np.trace(u).real), 1e-300):
        raise ZeroTrace(f"jump through channel {k} has vanishing weight")
    return hermitize(raw / tr)


def _pick_channel(weights: np.ndarray, zeta: float) -> int:
    cdf = np.cumsum(weights)
    k = int(np.searchsorted(cdf, zeta * cdf[-1], side="left"))
    return min(k, weights.size - 1)


def _rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _simulate(model, rho0, t_max, rng, cache: dict) -> Trajectory:
    theta = rho0
    t_cur = 0.0
    times: list[float] = []
    channels: list[int] = []
    states: list[np.ndarray] = []
    trapped = False
    trap_entry = None
    t_scale = 1.0 / model.gamma_min if model.gamma_min else 1.0
    while True:
        key = canonical_key(theta).grid_a
        sampler = cache.get(key)
        if sampler is None:
            sampler = _StateSampler(model, theta)
            if len(cache) < _CACHE_LIMIT:
                cache[key] = sampler
        eta = rng.random()
        if eta >= 1.0 - sampler.q:
            trapped = True
            trap_entry = t_cur
            break
        tau = EPS_TIME if eta == 0.0 else sampler.invert(1.0 - eta, t_scale)
        t_next = t_cur + tau
        if t_next > t_max:
            break
        # One propagation serves both the channel draw and the jump map.
        u = conditional_propagate(model, theta, tau)
        weights = np.clip(
            [ch.gamma * float(np.trace(ch.v @ u @ ch.v.conj().T).real) for ch in model.channels],
            0.0,
            None,
        )
        if weights.sum() <= 1e-300:
            raise AllWeightsZero(f"no channel can fire at tau={tau}")
        k = _pick_channel(weights, rng.random())
        v = model.channels[k].v
        raw = v @ u @ v.conj().T
        theta = hermitize(raw / np.trace(raw).real)
        times.append(t_next)
        channels.append(k)
        states.append(theta)
        t_cur = t_next
    return Trajectory(
        initial_state=rho0,
        t_max=float(t_max),
        jump_times=np.array(times),
        channels=np.array(channels, dtype=int),
        post_jump_states=states,
        trapped=trapped,
        trap_entry_time=trap_entry,
    )


def simulate_trajectory(model: LindbladModel, rho0, t_max: float, seed) -> Trajectory:
    """Simulate one trajectory; identical output for identical (model, ρ₀, seed)."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    rho0 = require_density(rho0, what="rho0")
    return _simulate(model, rho0, float(t_max), _rng_for(seed), {})


def state_at(trajectory: Trajectory, model: LindbladModel, t: float) -> np.ndarray:
    """Normalized trajectory state at time t (drift of the last post-jump state)."""
    if not 0.0 <= t <= trajectory.t_max:
        raise ValueError(f"t={t} outside [0, {trajectory.t_max}]")
    idx = int(np.searchsorted(trajectory.jump_times, t, side="right")) - 1
    if idx < 0:
        theta, t_n = trajectory.initial_state, 0.0
    else:
        theta, t_n = trajectory.post_jump_states[idx], float(trajectory.jump_times[idx])
    u = conditional_propagate(model, theta, t - t_n)
    return hermitize(u / np.trace(u).real)


def _grid_states(trajectory: Trajectory, model: LindbladModel, t_grid: np.ndarray) -> np.ndarray:
    """States at all grid points, walking the segments once."""
    out = np.empty((t_grid.size, model.dim, model.dim), dtype=np.complex128)
    for i, t in enumerate(t_grid):
        out[i] = state_at(trajectory, model, float(t))
    return out


def _chunk_sums(model, rho0, t_grid, seed, start, stop, log_jumps=False):
    acc = np.zeros((t_grid.size, model.dim, model.dim), dtype=np.complex128)
    acc_sq = np.zeros((t_grid.size, model.dim, model.dim), dtype=np.float64)
    rows: list[tuple[int, float, int, str]] = []
    cache: dict = {}
    for i in range(start, stop):
        traj = _simulate(model, rho0, float(t_grid[-1]), _rng_for((seed, i)), cache)
        states = _grid_states(traj, model, t_grid)
        acc += states
        acc_sq += np.abs(states) ** 2
        if log_jumps:
            for t, k, theta in zip(traj.jump_times, traj.channels, traj.post_jump_states):
                rows.append((i, float(t), int(k), canonical_key(theta).digest()))
    return acc, acc_sq, rows


def ensemble_average(
    model: LindbladModel,
    rho0,
    t_grid,
    m: int,
    seed,
    *,
    workers: int = 1,
) -> EnsembleEstimate:
    """Average of M independent trajectories on a time grid.

    Per-trajectory streams are keyed by (seed, index); the reduction is
    chunked with a fixed chunk size and merged by compensated summation, so
    the result is bit-identical for any ``workers``.
    """
    estimate, _rows = ensemble_with_jumps(model, rho0, t_grid, m, seed, workers=workers, log_jumps=False)
    return estimate


def ensemble_with_jumps(
    model: LindbladModel,
    rho0,
    t_grid,
    m: int,
    seed,
    *,
    workers: int = 1,
    log_jumps: bool = True,
) -> tuple[EnsembleEstimate, list[tuple[int, float, int, str]]]:
    """ensemble_average plus the per-trajectory jump log (index, time, channel, state key)."""
    if m < 1:
        raise ValueError("need at least one trajectory")
    rho0 = require_density(rho0, what="rho0")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be ascending and non-negative")
    if t_grid[-1] <= 0:
        raise ValueError("the final grid time must be positive")

    ranges = [(start, min(start + _CHUNK, m)) for start in range(0, m, _CHUNK)]
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(
                    _chunk_sums,
                    *zip(*[(model, rho0, t_grid, seed, a, b, log_jumps) for a, b in ranges]),
                )
            )
    else:
        partials = [_chunk_sums(model, rho0, t_grid, seed, a, b, log_jumps) for a, b in ranges]

    total = np.zeros((t_grid.size, model.dim, model.dim), dtype=np.complex128)
    total_sq = np.zeros((t_grid.size, model.dim, model.dim), dtype=np.float64)
    comp = np.zeros_like(total)
    comp_sq = np.zeros_like(total_sq)
    rows: list[tuple[int, float, int, str]] = []
    for acc, acc_sq, chunk_rows in partials:
        y = acc - comp
        t_new = total + y
        comp = (t_new - total) - y
        total = t_new
        y2 = acc_sq - comp_sq
        t2 = total_sq + y2
        comp_sq = (t2 - total_sq) - y2
        total_sq = t2
        rows.extend(chunk_rows)

    mean = total / m
    if m > 1:
        var = np.clip(total_sq / m - np.abs(mean) ** 2, 0.0, None) * (m / (m - 1))
        stderr = np.sqrt(var.sum(axis=(1, 2)) / m)
    else:
        stderr = np.zeros(t_grid.size)
    estimate = EnsembleEstimate(
        times=t_grid,
        mean=[hermitize(mean[i]) for i in range(t_grid.size)],
        stderr=stderr,
        n_trajectories=m,
    )
    return estimate, rows
