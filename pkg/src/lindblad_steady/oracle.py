"""Brute-force reference results for cross-validation.

Everything here works on the vectorized generator: with vec column-major,

    L = -i (I ⊗ H_c - H_c* ⊗ I) + Σ_k γ_k (V_k* ⊗ V_k),

so dρ/dt = ℒ(ρ) becomes the linear ODE d vec(ρ)/dt = L vec(ρ).  The Cesàro
time average lim (1/T)∫₀^T ρ(t) dt equals the spectral projection of vec(ρ₀)
onto the eigenvalue-0 eigenspace of L: all decaying modes vanish and purely
imaginary eigenvalues time-average to zero, so they are excluded from the
projection.  The 0-eigenspace of a Lindbladian is semisimple (solutions are
bounded); a detected nilpotent coupling raises DegenerateSpectrum rather than
silently returning a wrong oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import DegenerateSpectrum, StepUnderflow
from .linalg import as_matrix, frobenius, hermitize, require_density
from .model import LindbladModel, liouvillian_matrix

#: Relative scale of the kernel detection threshold, |λ| <= ZERO_TOL_SCALE·||L||_F.
ZERO_TOL_SCALE = 1e-9


@dataclass
class TimeSeries:
    """Solution samples of the master equation on an ascending time grid."""

    times: np.ndarray
    states: list[np.ndarray]


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(y: np.ndarray, n: int) -> np.ndarray:
    return y.reshape((n, n), order="F")


def integrate(model: LindbladModel, rho0, t_grid, *, ode_tol: float = 1e-10) -> TimeSeries:
    """Solve dρ/dt = ℒ(ρ) from ρ(0) = ρ₀ with adaptive RK45 at the grid times."""
    rho0 = require_density(rho0, what="rho0")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be ascending and non-negative")
    n = model.dim
    liou = liouvillian_matrix(model)
    if t_grid[-1] == 0.0:
        return TimeSeries(times=t_grid, states=[rho0.copy() for _ in t_grid])
    sol = solve_ivp(
        lambda _t, y: liou @ y,
        (0.0, float(t_grid[-1])),
        _vec(rho0),
        method="RK45",
        t_eval=t_grid,
        rtol=ode_tol,
        atol=ode_tol,
    )
    if not sol.success:
        raise StepUnderflow(f"integrator failed: {sol.message}")
    states = [_unvec(sol.y[:, i], n) for i in range(sol.y.shape[1])]
    return TimeSeries(times=t_grid, states=states)


def running_average(model: LindbladModel, rho0, t_final: float, *, ode_tol: float = 1e-10) -> np.ndarray:
    """(1/T)∫₀^T ρ(t) dt via an augmented ODE (slow Cesàro convergence, O(1/T))."""
    rho0 = require_density(rho0, what="rho0")
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    n = model.dim
    liou = liouvillian_matrix(model)
    m = n * n

    def rhs(_t, y):
        out = np.empty_like(y)
        out[:m] = liou @ y[:m]
        out[m:] = y[:m]
        return out

    y0 = np.concatenate([_vec(rho0), np.zeros(m, dtype=np.complex128)])
    sol = solve_ivp(rhs, (0.0, float(t_final)), y0, method="RK45", rtol=ode_tol, atol=ode_tol)
    if not sol.success:
        raise StepUnderflow(f"integrator failed: {sol.message}")
    return hermitize(_unvec(sol.y[m:, -1], n) / t_final)


def _zero_cluster_projector(liou: np.ndarray) -> np.ndarray:
    """Spectral projector onto the |λ| <= tol cluster of L (oblique, exact)."""
    tol = ZERO_TOL_SCALE * max(frobenius(liou), 1e-300)
    is_zero = lambda lam: abs(lam) <= tol  # noqa: E731

    eigenvalues = np.linalg.eigvals(liou)
    small = np.abs(eigenvalues)
    ambiguous = (small > tol) & (small <= 100.0 * tol)
    if np.any(ambiguous):
        raise DegenerateSpectrum(
            f"kernel rank ambiguous: eigenvalues of magnitude {small[ambiguous]} near tol {tol:.3g}"
        )

    t_right, z_right, m_right = scipy.linalg.schur(liou, output="complex", sort=is_zero)
    t_left, z_left, m_left = scipy.linalg.schur(liou.conj().T, output="complex", sort=is_zero)
    if m_right == 0 or m_right != m_left:
        raise DegenerateSpectrum(f"kernel cluster sizes disagree: {m_right} vs {m_left}")
    # Nilpotent coupling inside the zero cluster would make the projection wrong.
    block = t_right[:m_right, :m_right]
    if frobenius(block - np.diag(np.diag(block))) > 1e-7 * max(frobenius(liou), 1.0):
        raise DegenerateSpectrum("zero eigenvalue cluster is not semisimple")
    vr = z_right[:, :m_right]
    vl = z_left[:, :m_left]
    overlap = vl.conj().T @ vr
    return vr @ np.linalg.solve(overlap, vl.conj().T)


def cesaro_steady(model: LindbladModel, rho0) -> np.ndarray:
    """lim (1/T)∫₀^T ρ(t) dt, computed by spectral projection of vec(ρ₀)."""
    rho0 = require_density(rho0, what="rho0")
    liou = liouvillian_matrix(model)
    projector = _zero_cluster_projector(liou)
    return hermitize(_unvec(projector @ _vec(rho0), model.dim))


def null_space_steady(model: LindbladModel) -> list[np.ndarray]:
    """Hermitian basis of the numerical kernel of L, unit Frobenius norm each."""
    liou = liouvillian_matrix(model)
    n = model.dim
    tol = ZERO_TOL_SCALE * max(frobenius(liou), 1e-300)
    _u, sigma, vh = np.linalg.svd(liou)
    kernel_dim = int(np.sum(sigma <= tol))
    if kernel_dim == 0:
        raise DegenerateSpectrum("no numerical kernel found (not a valid generator?)")
    kernel = [_unvec(vh[-(i + 1)].conj(), n) for i in range(kernel_dim)]

    # The kernel of a Lindbladian is closed under X -> X†, so it has a basis of
    # Hermitian elements; extract it by SVD over the real coordinates of the
    # Hermitian/anti-Hermitian parts.
    iu = np.triu_indices(n, k=1)
    candidates = []
    for x in kernel:
        for h in (hermitize(x), hermitize(-1j * x)):
            coords = np.concatenate([np.diag(h).real, np.sqrt(2.0) * h[iu].real, np.sqrt(2.0) * h[iu].imag])
            candidates.append(coords)
    _u2, sigma2, vh2 = np.linalg.svd(np.array(candidates))
    basis = []
    for row in vh2[:kernel_dim]:
        h = np.zeros((n, n), dtype=np.complex128)
        h[np.diag_indices(n)] = row[: n]
        re = row[n : n + iu[0].size] / np.sqrt(2.0)
        im = row[n + iu[0].size :] / np.sqrt(2.0)
        h[iu] = re + 1j * im
        h[(iu[1], iu[0])] = re - 1j * im
        basis.append(h / frobenius(h))
    return basis
