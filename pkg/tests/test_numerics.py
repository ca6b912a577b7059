import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topobound.numerics import (NotPositiveDefiniteError, SingularMatrixError, as_sym,
                                chol_spd_solve, gen_sym_eig, solve_complex_linear, sym_eig)


def test_solve_recovers_constructed_solution(rng):
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)) + 8 * np.eye(8)
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    assert np.allclose(solve_complex_linear(A, A @ z), z, atol=1e-10)


def test_singular_matrix_raises():
    A = np.ones((3, 3))
    with pytest.raises(SingularMatrixError):
        solve_complex_linear(A, np.ones(3))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        solve_complex_linear(np.eye(3), np.ones(4))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_sym_eig_reconstructs(n, seed):
    r = np.random.default_rng(seed)
    B = r.normal(size=(n, n))
    S = B + B.T
    lam, psi = sym_eig(S)
    assert np.all(np.diff(lam) <= 1e-12)
    assert np.allclose(psi @ np.diag(lam) @ psi.T, S, atol=1e-10)


def test_as_sym_rejects_asymmetric():
    with pytest.raises(ValueError):
        as_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_gen_sym_eig_b_orthonormal(rng):
    B = rng.normal(size=(6, 6))
    Bm = B @ B.T + 6 * np.eye(6)
    A = rng.normal(size=(6, 6))
    A = A + A.T
    lam, psi = gen_sym_eig(A, Bm)
    assert np.allclose(psi.T @ Bm @ psi, np.eye(6), atol=1e-10)
    assert np.allclose(A @ psi, Bm @ psi * lam, atol=1e-9)


def test_cholesky_solve_and_failure(rng):
    B = rng.normal(size=(5, 5))
    S = B @ B.T + np.eye(5)
    x = rng.normal(size=5)
    assert np.allclose(chol_spd_solve(S, S @ x), x)
    with pytest.raises(NotPositiveDefiniteError):
        chol_spd_solve(-np.eye(3), np.ones(3))
