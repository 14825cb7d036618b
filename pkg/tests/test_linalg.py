import numpy as np
import pytest

import lindblad_steady as ls
from lindblad_steady.linalg import Tolerances, frobenius, hermitize

from helpers import RHO_GENERIC, example_c, random_density, random_rank_one_model


class TestSpectralDecompose:
    def test_diagonal_input(self):
        spec = ls.spectral_decompose(np.diag([1.0, 2.0]))
        assert np.allclose(spec.eigenvalues, [1.0, 2.0])
        assert np.allclose(np.abs(spec.right_vectors), np.eye(2))
        assert spec.diagonalizable

    def test_example_c_conditional_hamiltonian(self):
        g1 = 1.3
        spec = example_c(g1).h_c_spectrum
        assert np.allclose(sorted(spec.eigenvalues, key=lambda z: z.imag), [-0.5j * g1, 0.0])

    def test_nilpotent_is_defective(self):
        spec = ls.spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert not spec.diagonalizable

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            spec = ls.spectral_decompose(m)
            if spec.diagonalizable:
                rebuilt = spec.right_vectors @ np.diag(spec.eigenvalues) @ spec.inverse_vectors
                assert frobenius(rebuilt - m) <= 1e-8 * frobenius(m)

    def test_eigenvalue_ordering_is_deterministic(self):
        m = np.array([[1.0, 2.0], [3.0, -1.0]]) - 1j * np.diag([0.2, 0.7])
        a = ls.spectral_decompose(m).eigenvalues
        b = ls.spectral_decompose(m.copy()).eigenvalues
        assert np.array_equal(a, b)
        assert np.all(np.diff(a.imag) >= -1e-15)


class TestValidateDensity:
    def test_maximally_mixed_ok(self):
        assert ls.validate_density(np.eye(2) / 2).ok

    def test_psd_violation(self):
        # eigenvalues 0.5 +- sqrt(0.01 + 0.64): the smaller one is negative
        report = ls.validate_density(np.array([[0.6, 0.8], [0.8, 0.4]]))
        assert not report.ok
        assert report.magnitude("psd") == pytest.approx(np.sqrt(0.65) - 0.5, abs=1e-12)
        assert report.magnitude("trace") is None

    def test_trace_violation(self):
        report = ls.validate_density(np.diag([1.0, 0.1]))
        assert not report.ok
        assert report.magnitude("trace") == pytest.approx(0.1, abs=1e-12)

    def test_jump_closure(self):
        # Normalized jump outcomes of random models are valid densities.
        rng = np.random.default_rng(5)
        for _ in range(10):
            model = random_rank_one_model(rng, 3)
            theta = random_density(rng, 3)
            tau = float(rng.uniform(0.05, 2.0))
            u = ls.conditional_propagate(model, theta, tau)
            for k, ch in enumerate(model.channels):
                raw = ch.v @ u @ ch.v.conj().T
                tr = np.trace(raw).real
                if tr < 1e-12:
                    continue
                assert ls.validate_density(raw / tr, Tolerances.uniform(1e-8)).ok


class TestCanonicalKey:
    def test_small_perturbation_same_key(self):
        rng = np.random.default_rng(3)
        delta = hermitize(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        delta *= 1e-13 / frobenius(delta)
        assert ls.canonical_key(RHO_GENERIC) == ls.canonical_key(RHO_GENERIC + delta)

    def test_distinct_states_distinct_keys(self):
        assert ls.canonical_key(np.diag([1.0, 0.0])) != ls.canonical_key(np.diag([0.0, 1.0]))

    def test_grid_boundary_is_resolved(self):
        # Entries straddling a grid-A cell edge agree on the offset grid.
        quantum = 1e-9
        lo = np.diag([0.49e-9, 1.0])
        hi = np.diag([0.51e-9, 1.0])
        assert ls.canonical_key(lo, quantum) == ls.canonical_key(hi, quantum)

    def test_stability_under_quarter_quantum_noise(self):
        rng = np.random.default_rng(17)
        quantum = 1e-9
        for _ in range(200):
            rho = random_density(rng, 3)
            delta = hermitize(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
            delta *= (quantum / 4.0) / frobenius(delta)
            assert ls.canonical_key(rho, quantum) == ls.canonical_key(rho + delta, quantum)

    def test_keys_are_not_hashable(self):
        with pytest.raises(TypeError):
            hash(ls.canonical_key(np.eye(2) / 2))


class TestStateRegistry:
    def test_dedupes_and_indexes(self):
        reg = ls.StateRegistry(quantum=1e-9)
        i0 = reg.add(np.diag([1.0, 0.0]))
        i1 = reg.add(np.diag([0.0, 1.0]))
        again = reg.add(np.diag([1.0, 0.0]) + 1e-13 * np.eye(2))
        assert (i0, i1, again) == (0, 1, 0)
        assert len(reg) == 2
        assert reg.find(np.diag([0.0, 1.0])) == 1
        assert reg.find(np.eye(2) / 2) is None
