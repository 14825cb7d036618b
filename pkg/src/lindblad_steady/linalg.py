"""Dense complex matrix utilities.

Density matrices and operators are plain ``numpy`` complex arrays throughout
the package; this module provides the validation, eigendecomposition and
state-deduplication primitives everything else is built on.

Deduplication works on a quantized fingerprint of the matrix entries.  A
single rounding grid is unstable exactly at cell boundaries, so keys carry the
entrywise roundings on two grids offset by half a cell and two keys match when
every scalar agrees on at least one grid.  Since the boundary sets of the two
grids are ``quantum/2`` apart, matrices with ``||A - B||_F <= quantum/2``
always match.  The price is that matching is not transitive, hence keys are
deliberately unhashable and :class:`StateRegistry` combines exact-grid lookup
tables with a predicate scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Default tolerances (double-precision headroom for the N <= ~32 matrices
#: this package targets).
EPS_HERM = 1e-9
EPS_TRACE = 1e-9
EPS_PSD = 1e-9
EPS_SPECTRAL = 1e-8
COND_MAX = 1e8


@dataclass(frozen=True)
class Tolerances:
    """Tolerance triple used by :func:`validate_density`."""

    herm: float = EPS_HERM
    trace: float = EPS_TRACE
    psd: float = EPS_PSD

    @classmethod
    def uniform(cls, eps: float) -> "Tolerances":
        return cls(herm=eps, trace=eps, psd=eps)


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def frobenius(m) -> float:
    return float(np.linalg.norm(m, "fro"))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (M + M†)/2."""
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_density`: ok flag plus violated invariants."""

    ok: bool
    violations: tuple[tuple[str, float], ...] = ()

    def magnitude(self, name: str) -> float | None:
        for key, value in self.violations:
            if key == name:
                return value
        return None


def validate_density(m, tol: Tolerances = DEFAULT_TOLERANCES) -> ValidationReport:
    """Check the three density-matrix invariants.

    Hermiticity within ``tol.herm`` (Frobenius norm of M - M†), unit trace
    within ``tol.trace`` and positive semi-definiteness with smallest
    eigenvalue >= ``-tol.psd``.  Report-valued; never raises.
    """
    a = as_matrix(m)
    violations = []
    herm_defect = frobenius(a - a.conj().T)
    if herm_defect > tol.herm:
        violations.append(("hermitian", herm_defect))
    trace_defect = abs(np.trace(a) - 1.0)
    if trace_defect > tol.trace:
        violations.append(("trace", float(trace_defect)))
    lo = float(np.linalg.eigvalsh(hermitize(a)).min())
    if lo < -tol.psd:
        violations.append(("psd", -lo))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def require_density(m, tol: Tolerances = DEFAULT_TOLERANCES, what: str = "density matrix") -> np.ndarray:
    """Return ``m`` as an array, raising ValidationError if it is not a valid state."""
    a = as_matrix(m)
    report = validate_density(a, tol)
    if not report.ok:
        from .errors import ValidationError

        names = ", ".join(f"{name} ({mag:.3g})" for name, mag in report.violations)
        raise ValidationError(f"{what} violates: {names}", report=report)
    return a


@dataclass
class Spectrum:
    """Eigendecomposition M = S diag(δ) S⁻¹ with conditioning diagnostics.

    ``diagonalizable`` is false when the eigenvector matrix is ill-conditioned
    (κ(S) > COND_MAX) or the reconstruction residual exceeds the tolerance, in
    which case downstream code must not rely on S / S⁻¹.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    inverse_vectors: np.ndarray
    condition: float
    diagonalizable: bool


def spectral_decompose(m, tol: float = EPS_SPECTRAL) -> Spectrum:
    """Eigendecompose a (generally non-normal) matrix.

    Eigenvalues are sorted by (Im ascending, Re ascending) so decompositions
    are reproducible run to run.
    """
    from .errors import NonConvergence

    a = as_matrix(m)
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergence(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((vals.real, vals.imag))
    vals = vals[order]
    vecs = vecs[:, order]

    cond = float(np.linalg.cond(vecs))
    diagonalizable = bool(np.isfinite(cond) and cond <= COND_MAX)
    try:
        inv = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        inv = np.linalg.pinv(vecs)
        diagonalizable = False
    if diagonalizable:
        residual = frobenius(vecs @ np.diag(vals) @ inv - a)
        scale = max(frobenius(a), 1e-300)
        if residual > tol * scale:
            diagonalizable = False
    return Spectrum(vals, vecs, inv, cond, diagonalizable)


class CanonicalKey:
    """Quantized fingerprint of a matrix on two half-offset rounding grids.

    Two keys compare equal when every scalar (re/im of every entry) agrees on
    grid A or on grid B.  Unhashable by design; see the module docstring.
    """

    __slots__ = ("dim", "grid_a", "grid_b")
    __hash__ = None

    def __init__(self, dim: int, grid_a: bytes, grid_b: bytes):
        self.dim = dim
        self.grid_a = grid_a
        self.grid_b = grid_b

    def __eq__(self, other):
        if not isinstance(other, CanonicalKey):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if self.grid_a == other.grid_a or self.grid_b == other.grid_b:
            return True
        a1 = np.frombuffer(self.grid_a, dtype=np.int64)
        a2 = np.frombuffer(other.grid_a, dtype=np.int64)
        b1 = np.frombuffer(self.grid_b, dtype=np.int64)
        b2 = np.frombuffer(other.grid_b, dtype=np.int64)
        return bool(np.all((a1 == a2) | (b1 == b2)))

    def digest(self) -> str:
        """Opaque hex label for logs and CSV output (grid-A rounding only)."""
        import hashlib

        return hashlib.blake2b(self.grid_a, digest_size=8).hexdigest()


def canonical_key(rho, quantum: float = 1e-9) -> CanonicalKey:
    """Key for deduplicating density matrices on a grid of size ``quantum``."""
    a = as_matrix(rho)
    flat = np.concatenate([a.real.ravel(), a.imag.ravel()]) / quantum
    grid_a = np.round(flat).astype(np.int64)
    grid_b = np.round(flat - 0.5).astype(np.int64)
    return CanonicalKey(a.shape[0], grid_a.tobytes(), grid_b.tobytes())


class StateRegistry:
    """Deduplicated store of density matrices, indexed insertion order."""

    def __init__(self, quantum: float = 1e-9):
        self.quantum = quantum
        self.matrices: list[np.ndarray] = []
        self._keys: list[CanonicalKey] = []
        self._by_a: dict[bytes, int] = {}
        self._by_b: dict[bytes, int] = {}

    def __len__(self) -> int:
        return len(self.matrices)

    def find(self, rho) -> int | None:
        """Index of a previously added state matching ``rho``, else None."""
        key = canonical_key(rho, self.quantum)
        hit = self._by_a.get(key.grid_a)
        if hit is None:
            hit = self._by_b.get(key.grid_b)
        if hit is not None:
            return hit
        for i, known in enumerate(self._keys):
            if known == key:
                return i
        return None

    def add(self, rho) -> int:
        """Find ``rho`` or append it; returns its index either way."""
        existing = self.find(rho)
        if existing is not None:
            return existing
        key = canonical_key(rho, self.quantum)
        index = len(self.matrices)
        self.matrices.append(as_matrix(rho))
        self._keys.append(key)
        self._by_a.setdefault(key.grid_a, index)
        self._by_b.setdefault(key.grid_b, index)
        return index
