"""Lindblad model construction and conditional (no-jump) evolution.

The master equation evolves a density matrix ρ as

    dρ/dt = ℒ(ρ) = -i[H, ρ] + Σ_k γ_k (V_k ρ V_k† - ½{V_k†V_k, ρ})
          = -i(H_c ρ - ρ H_c†) + Σ_k γ_k V_k ρ V_k†,

with the non-Hermitian conditional Hamiltonian H_c = H - (i/2)Λ and decay
operator Λ = Σ_k γ_k V_k†V_k.  Between quantum jumps a trajectory state Θ
evolves under the unnormalized conditional propagator

    U_t(Θ) = exp(-i H_c t) Θ exp(+i H_c† t),

whose trace Tr U_t(Θ) is the probability that no jump has happened up to t.

When H_c is diagonalizable, H_c = S diag(δ) S⁻¹, everything reduces to scalar
exponentials of the eigenvalues δ_m = R_m + i·Im δ_m (Im δ_m <= 0 for a valid
model): with Θ̂ = S⁻¹ Θ S⁻† one has

    U_t(Θ) = S (E Θ̂ E†) S†,   E = diag(e^{-i δ_m t}),

so Tr U_t(Θ) is a finite sum of complex exponentials.  Those coefficient /
exponent pairs are exposed to the samplers, and the t → ∞ limit of the trace
(the trapping probability) keeps exactly the entry pairs with zero decay and
equal real parts; all decaying pairs vanish, and the zero-decay oscillatory
pairs must carry zero weight because Tr U_t is monotone.  Defective H_c falls
back to scaling-and-squaring matrix exponentials.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (
    DimensionMismatch,
    NonConvergence,
    NonPositiveRate,
    NotHermitian,
    SpectralFallbackWarning,
    ValidationError,
)
from .linalg import Spectrum, as_matrix, frobenius, hermitize, spectral_decompose

#: Survival limits at or below this value are treated as exactly zero
#: (separates genuine trapping from numerical residue).
TRAP_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Channel:
    """One dissipation channel: Lindblad operator ``v`` firing at rate ``gamma``."""

    v: np.ndarray
    gamma: float


@dataclass
class LindbladModel:
    """Validated model with precomputed spectral data of H_c.

    Immutable after :func:`build_model`; all operations on it are pure, so a
    model can be shared freely across workers.
    """

    dim: int
    hamiltonian: np.ndarray
    channels: tuple[Channel, ...]
    lam: np.ndarray
    h_c: np.ndarray
    h_c_spectrum: Spectrum
    #: smallest positive decay rate 2|Im δ_m|, or None when nothing decays
    gamma_min: float | None
    # Internal spectral caches (eigenbasis of H_c):
    _sts: np.ndarray = field(repr=False, default=None)  # S†S
    _zero_decay: np.ndarray = field(repr=False, default=None)  # |Im δ_m| ~ 0
    _persist: np.ndarray = field(repr=False, default=None)  # pairs surviving t→∞
    _convergent: np.ndarray = field(repr=False, default=None)  # pairs with decaying U entries

    @property
    def diagonalizable(self) -> bool:
        return self.h_c_spectrum.diagonalizable

    def to_eigenbasis(self, theta: np.ndarray) -> np.ndarray:
        """Θ̂ = S⁻¹ Θ S⁻† (congruence; preserves positivity)."""
        inv = self.h_c_spectrum.inverse_vectors
        return inv @ theta @ inv.conj().T

    def from_eigenbasis(self, theta_hat: np.ndarray) -> np.ndarray:
        s = self.h_c_spectrum.right_vectors
        return s @ theta_hat @ s.conj().T


def build_model(h, channels, *, eps_herm: float = linalg.EPS_HERM, eps_psd: float = linalg.EPS_PSD) -> LindbladModel:
    """Assemble and validate a model from a Hamiltonian and channels.

    Raises NotHermitian / NonPositiveRate / DimensionMismatch on malformed
    input and ValidationError when H_c acquires a growing mode (impossible for
    PSD Λ, so it signals corrupted input).
    """
    h = as_matrix(h)
    n = h.shape[0]
    if frobenius(h - h.conj().T) > eps_herm:
        raise NotHermitian("Hamiltonian is not Hermitian")
    if not channels:
        raise DimensionMismatch("at least one channel is required")
    normalized = []
    for i, ch in enumerate(channels):
        v = as_matrix(ch.v if isinstance(ch, Channel) else ch[0])
        gamma = float(ch.gamma if isinstance(ch, Channel) else ch[1])
        if v.shape[0] != n:
            raise DimensionMismatch(f"channel {i} has dimension {v.shape[0]}, expected {n}")
        if not gamma > 0.0:
            raise NonPositiveRate(f"channel {i} has non-positive rate {gamma}")
        normalized.append(Channel(v=v, gamma=gamma))
    channels = tuple(normalized)

    lam = np.zeros((n, n), dtype=np.complex128)
    for ch in channels:
        lam += ch.gamma * (ch.v.conj().T @ ch.v)
    lam = hermitize(lam)
    if float(np.linalg.eigvalsh(lam).min()) < -eps_psd:
        raise ValidationError("decay operator Λ is not positive semi-definite")

    h_c = h - 0.5j * lam
    spectrum = spectral_decompose(h_c)
    if float(spectrum.eigenvalues.imag.max(initial=0.0)) > eps_psd:
        raise ValidationError("conditional Hamiltonian has a growing mode (Im δ > 0)")

    vals = spectrum.eigenvalues
    scale = float(np.abs(vals).max(initial=0.0))
    zero_tol = 1e-9 * scale + 1e-300
    zero_decay = np.abs(vals.imag) <= zero_tol

    # Group equal real parts among zero-decay eigenvalues; only same-group
    # pairs survive the long-time average (others dephase to zero).
    group = np.full(n, -1)
    zd_idx = np.flatnonzero(zero_decay)
    if zd_idx.size:
        order = zd_idx[np.argsort(vals.real[zd_idx])]
        current = 0
        group[order[0]] = 0
        for prev, cur in zip(order[:-1], order[1:]):
            if vals.real[cur] - vals.real[prev] > zero_tol:
                current += 1
            group[cur] = current
    persist = zero_decay[:, None] & zero_decay[None, :] & (group[:, None] == group[None, :])
    convergent = ~(zero_decay[:, None] & zero_decay[None, :])

    decays = -2.0 * vals.imag
    positive = decays[decays > 2.0 * zero_tol]
    gamma_min = float(positive.min()) if positive.size else None

    return LindbladModel(
        dim=n,
        hamiltonian=h,
        channels=channels,
        lam=lam,
        h_c=h_c,
        h_c_spectrum=spectrum,
        gamma_min=gamma_min,
        _sts=spectrum.right_vectors.conj().T @ spectrum.right_vectors,
        _zero_decay=zero_decay,
        _persist=persist,
        _convergent=convergent,
    )


def apply_lindbladian(model: LindbladModel, rho) -> np.ndarray:
    """ℒ(ρ); traceless for every ρ by construction of the generator."""
    rho = as_matrix(rho)
    if rho.shape[0] != model.dim:
        raise DimensionMismatch(f"state has dimension {rho.shape[0]}, expected {model.dim}")
    out = -1j * (model.h_c @ rho - rho @ model.h_c.conj().T)
    for ch in model.channels:
        out += ch.gamma * (ch.v @ rho @ ch.v.conj().T)
    return out


def liouvillian_matrix(model: LindbladModel) -> np.ndarray:
    """N²×N² matrix L with unvec(L vec(ρ)) = ℒ(ρ), vec column-major."""
    n = model.dim
    eye = np.eye(n)
    h_c = model.h_c
    out = -1j * (np.kron(eye, h_c) - np.kron(h_c.conj(), eye))
    for ch in model.channels:
        out += ch.gamma * np.kron(ch.v.conj(), ch.v)
    return out


def conditional_propagate(model: LindbladModel, theta, t: float) -> np.ndarray:
    """Unnormalized no-jump evolution U_t(Θ) = e^{-iH_c t} Θ e^{iH_c† t}."""
    theta = as_matrix(theta)
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if t == 0.0:
        return theta.copy()
    spec = model.h_c_spectrum
    if spec.diagonalizable:
        e = np.exp(-1j * spec.eigenvalues * t)
        middle = model.to_eigenbasis(theta) * np.outer(e, e.conj())
        return model.from_eigenbasis(middle)
    try:
        p = scipy.linalg.expm(-1j * model.h_c * t)
    except Exception as exc:  # pragma: no cover - expm failure
        raise NonConvergence(f"matrix exponential failed at t={t}: {exc}") from exc
    return p @ theta @ p.conj().T


def survival(model: LindbladModel, theta, t: float) -> float:
    """Tr U_t(Θ): probability that no jump occurred in [0, t) given Θ."""
    terms = survival_terms(model, theta)
    if terms is not None:
        coeff, expo, _ = terms
        return float(np.real(coeff @ np.exp(expo * t)))
    return float(np.trace(conditional_propagate(model, theta, t)).real)


def survival_terms(model: LindbladModel, theta):
    """Exponential-mixture form of the survival function, or None if defective.

    Returns (coeff, expo, q) with Tr U_t(Θ) = Re Σ_p coeff_p e^{expo_p t} and
    q = lim_{t→∞} Tr U_t(Θ).
    """
    spec = model.h_c_spectrum
    if not spec.diagonalizable:
        return None
    theta_hat = model.to_eigenbasis(as_matrix(theta))
    weights = theta_hat * model._sts.T
    vals = spec.eigenvalues
    # exponent of entry (m, n): (-iδ_m + iδ_n*) t
    expo = (-1j * vals)[:, None] + (1j * vals.conj())[None, :]
    q = float(np.real(weights[model._persist].sum()))
    keep = ~model._persist & (np.abs(weights) > 1e-18)
    coeff = np.concatenate([weights[keep], [q + 0j]])
    expo = np.concatenate([expo[keep], [0.0 + 0j]])
    return coeff, expo, min(max(q, 0.0), 1.0)


def survival_limit(model: LindbladModel, theta) -> float:
    """lim_{t→∞} Tr U_t(Θ); values > TRAP_THRESHOLD flag a possible trapping state.

    For defective H_c the limit is estimated from survival probes at
    T₀, 2T₀, 4T₀ (T₀ = 50/γ_min) with a 1e-6 agreement check.
    """
    terms = survival_terms(model, theta)
    if terms is not None:
        q = terms[2]
    else:
        q = _survival_limit_probe(model, as_matrix(theta))
    return 0.0 if q <= TRAP_THRESHOLD else min(q, 1.0)


def _survival_limit_probe(model: LindbladModel, theta: np.ndarray) -> float:
    if model.gamma_min is None:
        # Nothing decays: Tr U_t(Θ) is constant.
        return float(np.trace(theta).real)
    warnings.warn(
        "H_c is not diagonalizable; estimating the survival limit by probing",
        SpectralFallbackWarning,
        stacklevel=3,
    )
    t0 = 50.0 / model.gamma_min
    probes = [float(np.trace(conditional_propagate(model, theta, t)).real) for t in (t0, 2 * t0, 4 * t0)]
    if abs(probes[1] - probes[0]) > 1e-6 or abs(probes[2] - probes[1]) > 1e-6:
        raise NonConvergence(f"survival probes did not settle: {probes}")
    return max(probes[2], 0.0)


def trap_projection(model: LindbladModel, theta) -> tuple[np.ndarray, float]:
    """Long-time-surviving part of Θ (unnormalized) and its trace q.

    Keeps exactly the eigenbasis entry pairs with zero decay and equal real
    parts; requires diagonalizable H_c.
    """
    spec = model.h_c_spectrum
    if not spec.diagonalizable:
        raise NonConvergence("trap projection requires a diagonalizable conditional Hamiltonian")
    theta_hat = model.to_eigenbasis(as_matrix(theta))
    kept = model.from_eigenbasis(np.where(model._persist, theta_hat, 0.0))
    kept = hermitize(kept)
    return kept, float(np.trace(kept).real)
