import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wavobs.assembly import Formulation, assemble
from wavobs.errors import ExpmOverflowError, NotSPDError, SingularMatrixError
from wavobs.kernels import (
    Tolerances,
    cholesky,
    eig_sym_pencil,
    expm,
    get_tolerances,
    set_tolerances,
    solve,
)


def random_matrix(rng, n, norm):
    A = rng.standard_normal((n, n))
    return A * (norm / np.linalg.norm(A, 2))


class TestExpm:
    def test_zero(self):
        np.testing.assert_array_equal(expm(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(expm(np.diag([1.0, 2.0])), np.diag([math.e, math.e**2]), rtol=1e-13)

    def test_rotation(self):
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        np.testing.assert_allclose(expm(J, math.pi / 2), J, atol=1e-12)

    @pytest.mark.parametrize("norm", [1e-3, 0.1, 0.9, 2.0, 5.0, 40.0])
    def test_against_scipy(self, rng, norm):
        A = random_matrix(rng, 12, norm)
        ref = sla.expm(A)
        np.testing.assert_allclose(expm(A), ref, rtol=1e-11, atol=1e-12 * np.linalg.norm(ref))

    def test_semigroup(self, rng):
        for _ in range(5):
            A = random_matrix(rng, 20, 5.0)
            s, t = rng.uniform(0, 1, 2)
            lhs = expm(A, s + t)
            assert np.linalg.norm(lhs - expm(A, s) @ expm(A, t)) <= 1e-10 * np.linalg.norm(lhs)

    def test_transpose(self, rng):
        A = random_matrix(rng, 10, 3.0)
        np.testing.assert_allclose(expm(A.T, 0.7), expm(A, 0.7).T, atol=1e-12)

    def test_wave_system_against_scipy(self):
        A = np.array(assemble(Formulation.mixed(), 24).state_matrix)
        ref = sla.expm(8.0 * A)
        assert np.linalg.norm(expm(A, 8.0) - ref) <= 1e-9 * np.linalg.norm(ref)

    def test_overflow(self):
        with pytest.raises(ExpmOverflowError):
            expm(np.array([[1000.0]]))
        with pytest.raises(ExpmOverflowError):
            expm(np.array([[np.nan]]))

    def test_shape(self):
        with pytest.raises(ValueError):
            expm(np.zeros((2, 3)))


class TestPencil:
    def test_identity(self, rng):
        B = np.eye(4) + 0.1 * np.ones((4, 4))
        lam, _ = eig_sym_pencil(B, B)
        np.testing.assert_allclose(lam, 1.0, atol=1e-13)

    def test_diag(self):
        lam, _ = eig_sym_pencil(np.diag([1.0, 4.0]), np.eye(2))
        np.testing.assert_allclose(lam, [1.0, 4.0])

    def test_classical_lowest(self):
        s = assemble(Formulation.classical(), 20)
        lam, _ = eig_sym_pencil(s.stiffness, s.mass)
        # lowest Dirichlet eigenvalue on (-1, 1) is (pi / 2)^2
        assert lam[0] == pytest.approx(math.pi**2 / 4, rel=5e-3)
        assert np.all(lam > 0)
        ref = sla.eigh(s.stiffness, s.mass, eigvals_only=True)
        np.testing.assert_allclose(lam, ref, rtol=1e-10)

    @given(st.integers(2, 15), st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_residual_and_b_orthonormal(self, n, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, n))
        A = X + X.T
        Y = rng.standard_normal((n, n))
        B = Y @ Y.T + n * np.eye(n)
        lam, V = eig_sym_pencil(A, B)
        assert np.all(np.diff(lam) >= 0)
        for k in range(n):
            r = A @ V[:, k] - lam[k] * B @ V[:, k]
            assert np.linalg.norm(r) <= 1e-9 * np.linalg.norm(A)
        np.testing.assert_allclose(V.T @ B @ V, np.eye(n), atol=1e-9)

    def test_not_spd(self):
        with pytest.raises(NotSPDError):
            eig_sym_pencil(np.eye(2), np.diag([1.0, -1.0]))
        with pytest.raises(NotSPDError):
            cholesky(np.zeros((2, 2)))


class TestSolve:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(solve(np.eye(3), b), b)

    def test_hilbert(self):
        H = sla.hilbert(4)
        np.testing.assert_allclose(solve(H, H.sum(axis=1)), np.ones(4), atol=1e-8)
        np.testing.assert_allclose(solve(H, H.sum(axis=1), spd_hint=True), np.ones(4), atol=1e-8)

    def test_spd_random(self, rng):
        X = rng.standard_normal((50, 50))
        A = X @ X.T + 50 * np.eye(50)
        b = rng.standard_normal(50)
        x = solve(A, b, spd_hint=True)
        assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10

    @given(arrays(np.float64, (6, 6), elements=st.floats(-10, 10)), st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_random_general(self, A, seed):
        A = A + 25 * np.eye(6)
        b = np.random.default_rng(seed).standard_normal(6)
        try:
            x = solve(A, b)
        except SingularMatrixError:
            return
        assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_singular(self):
        with pytest.raises(SingularMatrixError) as info:
            solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
        assert info.value.condition > 1e15

    def test_not_spd(self):
        with pytest.raises(NotSPDError):
            solve(np.diag([1.0, -1.0]), np.ones(2), spd_hint=True)

    def test_matrix_rhs(self, rng):
        A = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        B = rng.standard_normal((5, 3))
        np.testing.assert_allclose(A @ solve(A, B), B, atol=1e-12)


def test_tolerances_override():
    base = get_tolerances()
    try:
        new = set_tolerances(ridge=1e-10)
        assert new.ridge == 1e-10 and get_tolerances() is new
        assert new.hum_residual == base.hum_residual
    finally:
        set_tolerances(**{f: getattr(base, f) for f in Tolerances.__dataclass_fields__})
    assert get_tolerances() == base
