import numpy as np
import pytest

import lindblad_steady as ls
from lindblad_steady.errors import (
    DimensionMismatch,
    NonPositiveRate,
    NotHermitian,
    SpectralFallbackWarning,
)
from lindblad_steady.linalg import frobenius, hermitize

from helpers import (
    RHO_GENERIC,
    V_LOWER,
    defective_model,
    example_a,
    example_b,
    example_c,
    random_density,
)


class TestBuildModel:
    def test_example_a_decay_operator(self):
        model = example_a(1.0, 1.0, h_scale=0.3)
        assert np.allclose(model.lam, np.eye(2))
        assert np.allclose(model.h_c, 0.3 * np.eye(2) - 0.5j * np.eye(2))

    def test_example_b_decay_operator(self):
        g1 = 1.7
        assert np.allclose(example_b(g1).lam, np.diag([g1, 0.0]))

    def test_classical_setup(self):
        beta = 0.8
        model = ls.build_model(np.zeros((2, 2)), [ls.Channel(np.eye(2, dtype=complex), beta)])
        assert np.allclose(model.lam, beta * np.eye(2))
        assert np.allclose(model.h_c, -0.5j * beta * np.eye(2))

    def test_rejects_non_hermitian_hamiltonian(self):
        with pytest.raises(NotHermitian):
            ls.build_model(np.array([[0.0, 1.0], [0.0, 0.0]]), [ls.Channel(V_LOWER, 1.0)])

    def test_rejects_non_positive_rate(self):
        with pytest.raises(NonPositiveRate):
            ls.build_model(np.zeros((2, 2)), [ls.Channel(V_LOWER, 0.0)])

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ls.build_model(np.zeros((3, 3)), [ls.Channel(V_LOWER, 1.0)])


class TestLindbladian:
    def test_traceless(self):
        rng = np.random.default_rng(0)
        model = example_a(1.0, 2.0)
        for _ in range(10):
            rho = hermitize(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            assert abs(np.trace(ls.apply_lindbladian(model, rho))) <= 1e-12 * frobenius(rho)

    def test_hermiticity_preserved(self):
        rng = np.random.default_rng(1)
        model = example_a(0.5, 1.5, h_scale=0.7)
        rho = random_density(rng, 2)
        out = ls.apply_lindbladian(model, rho)
        assert frobenius(out - out.conj().T) <= 1e-12

    def test_example_c_dark_state(self):
        model = example_c(1.0)
        assert frobenius(ls.apply_lindbladian(model, np.diag([0.0, 1.0]))) <= 1e-14

    def test_example_b_diagonal_null_space(self):
        model = example_b(1.0)
        for a in (0.0, 0.3, 1.0):
            assert frobenius(ls.apply_lindbladian(model, np.diag([a, 1.0 - a]))) <= 1e-14


class TestLiouvillianMatrix:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_apply_lindbladian(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = hermitize(x)
        v = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        model = ls.build_model(h, [ls.Channel(v, 0.9), ls.Channel(v.conj().T, 0.4)])
        liou = ls.liouvillian_matrix(model)
        for _ in range(20):
            rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            direct = ls.apply_lindbladian(model, rho)
            via_matrix = (liou @ rho.reshape(-1, order="F")).reshape((n, n), order="F")
            assert frobenius(direct - via_matrix) <= 1e-12 * frobenius(rho)

    def test_trace_functional_is_left_null(self):
        model = example_a(1.0, 2.0, h_scale=0.2)
        liou = ls.liouvillian_matrix(model)
        left = np.eye(2).reshape(-1, order="F").conj() @ liou
        assert np.max(np.abs(left)) <= 1e-12

    def test_example_c_kernel(self):
        liou = ls.liouvillian_matrix(example_c(1.0))
        vec = np.diag([0.0, 1.0]).reshape(-1, order="F")
        assert np.max(np.abs(liou @ vec)) <= 1e-14


class TestConditionalPropagation:
    def test_zero_time_identity(self):
        model = example_a(1.0, 2.0)
        assert np.allclose(ls.conditional_propagate(model, RHO_GENERIC, 0.0), RHO_GENERIC)

    def test_example_c_closed_form(self):
        g1 = 1.4
        model = example_c(g1)
        for t in (0.1, 0.9, 3.0):
            u = ls.conditional_propagate(model, np.diag([1.0, 0.0]), t)
            assert np.allclose(u, np.exp(-g1 * t) * np.diag([1.0, 0.0]), atol=1e-12)

    def test_example_b_trace_limit(self):
        model = example_b(1.0)
        for t in (0.5, 2.0, 8.0):
            expected = RHO_GENERIC[0, 0].real * np.exp(-t) + RHO_GENERIC[1, 1].real
            assert ls.survival(model, RHO_GENERIC, t) == pytest.approx(expected, abs=1e-12)

    def test_semigroup_property(self):
        rng = np.random.default_rng(2)
        for model in (example_a(0.8, 1.7, h_scale=0.4), defective_model()):
            theta = random_density(rng, 2)
            for _ in range(5):
                t, s = rng.uniform(0.0, 5.0, size=2)
                once = ls.conditional_propagate(model, theta, t + s)
                twice = ls.conditional_propagate(model, ls.conditional_propagate(model, theta, s), t)
                assert frobenius(once - twice) <= 1e-10

    def test_survival_monotone(self):
        model = example_b(1.0)
        grid = np.linspace(0.0, 6.0, 40)
        values = [ls.survival(model, RHO_GENERIC, t) for t in grid]
        assert values[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(values) <= 1e-12)


class TestSurvivalLimit:
    def test_example_b_limit_is_population(self):
        assert ls.survival_limit(example_b(1.0), RHO_GENERIC) == pytest.approx(0.7, abs=1e-12)

    def test_example_a_never_traps(self):
        assert ls.survival_limit(example_a(1.0, 2.0), RHO_GENERIC) == 0.0

    def test_example_c_dark_state_traps(self):
        assert ls.survival_limit(example_c(1.0), np.diag([0.0, 1.0])) == pytest.approx(1.0, abs=1e-12)

    def test_limit_matches_long_time_survival(self):
        for model in (example_a(1.0, 2.0), example_b(0.7), example_c(1.3)):
            t = 50.0 / model.gamma_min
            s = ls.survival(model, RHO_GENERIC, t)
            assert abs(s - ls.survival_limit(model, RHO_GENERIC)) <= 1e-6

    def test_defective_model_falls_back(self):
        model = defective_model()
        assert not model.diagonalizable
        with pytest.warns(SpectralFallbackWarning):
            q = ls.survival_limit(model, RHO_GENERIC)
        assert q == 0.0
