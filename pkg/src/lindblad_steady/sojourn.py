"""Time-integrated conditional evolution.

Two quantities drive the stationary-state assembly:

* the mean sojourn integral Ī(Θ) = ∫₀^∞ U_τ(Θ) dτ of a state that keeps
  jumping (its trace is the mean waiting time), and
* the long-time average of the normalized drift U_t(Θ)/Tr U_t(Θ) of a state
  that may never jump again (the trap average).

With diagonalizable H_c both are closed forms in the eigenbasis.  Writing
Θ̂ = S⁻¹ Θ S⁻†, δ_m = R_m + i·Im δ_m and d_m = |Im δ_m| ≥ 0:

    (∫₀^∞ E Θ̂ E† dτ)_{mn} = Θ̂_{mn} / [i (R_m - R_n) + d_m + d_n]

whenever d_m + d_n > 0; entry pairs with d_m = d_n = 0 either vanish for
non-trapping states (a zero-decay diagonal block of a non-trapping Θ̂ must be
zero, and positivity then clears its rows and columns) or belong to the
persistent part, which contributes nothing to any jump flux.  The trap
average keeps exactly the persistent pairs — zero decay and equal real part;
unequal real parts dephase to zero in the time average — renormalized by the
surviving trace.

Everything here is cross-checkable against adaptive Gauss–Kronrod quadrature
of the same integrals, which is also the fallback when H_c is defective.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .errors import NonConvergence, SpectralFallbackWarning, TrappingState, ZeroSurvivingTrace
from .linalg import as_matrix, frobenius, hermitize
from .model import (
    TRAP_THRESHOLD,
    LindbladModel,
    conditional_propagate,
    survival_limit,
    trap_projection,
)

#: Truncation of the semi-infinite quadratures: tail mass below e^-TAIL_LOG.
TAIL_LOG = 14.0 * np.log(10.0)


@dataclass
class SojournData:
    """Mean sojourn integral of one chain state.

    ``i_bar`` is ∫₀^∞ U_τ(Θ_s) dτ (units of time, Hermitian PSD) and
    ``tau_bar`` = Tr i_bar is the mean waiting time in the state.
    """

    state_index: int
    i_bar: np.ndarray
    tau_bar: float


def _pair_decay_floor(model: LindbladModel) -> float | None:
    """Smallest positive decay rate d_m + d_n over eigenvalue pairs."""
    d = np.clip(-model.h_c_spectrum.eigenvalues.imag, 0.0, None)
    pair = d[:, None] + d[None, :]
    positive = pair[pair > 0.0]
    if not positive.size:
        return None
    return float(positive.min())


def convergent_sojourn_closed_form(model: LindbladModel, theta) -> np.ndarray:
    """∫₀^∞ U_τ(Θ) dτ restricted to its convergent entry pairs (closed form)."""
    theta_hat = model.to_eigenbasis(as_matrix(theta))
    vals = model.h_c_spectrum.eigenvalues
    d = np.clip(-vals.imag, 0.0, None)
    denom = 1j * (vals.real[:, None] - vals.real[None, :]) + (d[:, None] + d[None, :])
    integral_hat = np.where(model._convergent, theta_hat / np.where(model._convergent, denom, 1.0), 0.0)
    return hermitize(model.from_eigenbasis(integral_hat))


def sojourn_integral_quadrature(model: LindbladModel, theta, *, epsabs: float = 1e-12) -> np.ndarray:
    """∫₀^∞ U_τ(Θ) dτ by adaptive Gauss–Kronrod panels on [0, T*].

    Valid for states whose survival vanishes (otherwise the integral
    diverges); T* is chosen so the truncated tail is below ~1e-14.
    """
    theta = as_matrix(theta)
    floor = _pair_decay_floor(model)
    if floor is None:
        return np.zeros_like(theta)
    t_star = TAIL_LOG / floor
    n = model.dim

    def integrand(t):
        u = conditional_propagate(model, theta, t)
        return np.concatenate([u.real.ravel(), u.imag.ravel()])

    stacked, _err = quad_vec(integrand, 0.0, t_star, epsabs=epsabs, epsrel=epsabs)
    out = stacked[: n * n].reshape(n, n) + 1j * stacked[n * n :].reshape(n, n)
    return hermitize(out)


def mean_sojourn_integral(
    model: LindbladModel,
    theta,
    state_index: int = -1,
    *,
    method: str = "auto",
) -> SojournData:
    """Mean sojourn integral Ī(Θ) and mean waiting time for a non-trapping state.

    ``method`` selects "closed-form", "quadrature" or "auto" (closed form when
    H_c is diagonalizable, quadrature otherwise).  Raises TrappingState when
    the survival limit of Θ is positive.
    """
    theta = as_matrix(theta)
    q = survival_limit(model, theta)
    if q > TRAP_THRESHOLD:
        raise TrappingState(f"state has positive survival limit {q:.3g}; its sojourn integral diverges")
    if method == "auto":
        method = "closed-form" if model.diagonalizable else "quadrature"
    if method == "closed-form":
        if not model.diagonalizable:
            raise NonConvergence("closed-form sojourn requires a diagonalizable conditional Hamiltonian")
        i_bar = convergent_sojourn_closed_form(model, theta)
    elif method == "quadrature":
        if method == "quadrature" and not model.diagonalizable:
            warnings.warn(
                "H_c is not diagonalizable; sojourn integral computed by quadrature",
                SpectralFallbackWarning,
                stacklevel=2,
            )
        i_bar = sojourn_integral_quadrature(model, theta)
    else:
        raise ValueError(f"unknown method {method!r}")
    tau_bar = float(np.trace(i_bar).real)
    return SojournData(state_index=state_index, i_bar=i_bar, tau_bar=tau_bar)


def channel_flux(model: LindbladModel, theta) -> np.ndarray:
    """Integrated jump density per channel: p_k = ∫₀^∞ γ_k Tr[V_k U_τ(Θ) V_k†] dτ.

    Valid for trapping states too: the persistent part of U_τ carries no jump
    flux, so only the convergent entries contribute.  Together with the
    survival limit these are the outgoing masses of the Markov chain column.
    """
    theta = as_matrix(theta)
    if model.diagonalizable:
        m_conv = convergent_sojourn_closed_form(model, theta)
        return np.array(
            [ch.gamma * float(np.trace(ch.v @ m_conv @ ch.v.conj().T).real) for ch in model.channels]
        )
    warnings.warn(
        "H_c is not diagonalizable; channel fluxes computed by quadrature",
        SpectralFallbackWarning,
        stacklevel=2,
    )
    return channel_flux_quadrature(model, theta)


def channel_flux_quadrature(model: LindbladModel, theta, *, epsabs: float = 1e-12) -> np.ndarray:
    """Quadrature twin of :func:`channel_flux` (per-channel scalar integrands)."""
    theta = as_matrix(theta)
    floor = _pair_decay_floor(model)
    if floor is None:
        return np.zeros(len(model.channels))
    t_star = TAIL_LOG / floor

    def integrand(t):
        u = conditional_propagate(model, theta, t)
        return np.array([ch.gamma * np.trace(ch.v @ u @ ch.v.conj().T).real for ch in model.channels])

    fluxes, _err = quad_vec(integrand, 0.0, t_star, epsabs=epsabs, epsrel=epsabs)
    return np.clip(fluxes, 0.0, None)


def trap_time_average(model: LindbladModel, theta) -> tuple[np.ndarray, float]:
    """Normalized long-time average of the no-jump drift of a trapping state.

    Returns (Θ_B, q) where q is the survival limit and Θ_B the unit-trace
    average lim (1/T)∫₀^T U_t(Θ)/Tr U_t(Θ) dt.  Defective H_c falls back to
    windowed Cesàro quadrature with an agreement check.
    """
    theta = as_matrix(theta)
    if model.diagonalizable:
        kept, q = trap_projection(model, theta)
        if q <= TRAP_THRESHOLD:
            raise ZeroSurvivingTrace("state has no surviving component; it is not a trapping state")
        return hermitize(kept / q), q
    q = survival_limit(model, theta)
    if q <= TRAP_THRESHOLD:
        raise ZeroSurvivingTrace("state has no surviving component; it is not a trapping state")
    warnings.warn(
        "H_c is not diagonalizable; trap average computed by windowed quadrature",
        SpectralFallbackWarning,
        stacklevel=2,
    )
    gamma_min = model.gamma_min or 1.0
    t0 = 50.0 / gamma_min
    first = _window_mean(model, theta, t0, 2.0 * t0)
    second = _window_mean(model, theta, t0, 3.0 * t0)
    if frobenius(first - second) > 1e-6:
        raise NonConvergence("windowed trap averages did not agree")
    avg = hermitize(0.5 * (first + second))
    return avg / float(np.trace(avg).real), q


def _window_mean(model: LindbladModel, theta: np.ndarray, a: float, b: float) -> np.ndarray:
    n = model.dim

    def integrand(t):
        u = conditional_propagate(model, theta, t)
        u = u / np.trace(u).real
        return np.concatenate([u.real.ravel(), u.imag.ravel()])

    stacked, _err = quad_vec(integrand, a, b, epsabs=1e-12, epsrel=1e-12)
    out = stacked[: n * n].reshape(n, n) + 1j * stacked[n * n :].reshape(n, n)
    return out / (b - a)
