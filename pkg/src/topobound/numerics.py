"""Dense linear-algebra kernels shared by the FEM, QCQP and SDP code.

All routines are thin, checked wrappers over LAPACK (via scipy.linalg). They
never modify their inputs.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla


class SingularMatrixError(np.linalg.LinAlgError):
    pass


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


SYM_TOL = 1e-12


def as_sym(S, tol=SYM_TOL):
    """Return S as a float array after checking (and removing) asymmetry."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    asym = np.linalg.norm(S - S.T)
    if asym > tol * max(np.linalg.norm(S), 1.0):
        raise ValueError(f"matrix is not symmetric (asymmetry {asym:.3e})")
    return 0.5 * (S + S.T)


def solve_complex_linear(A, b):
    """Solve A z = b with partial-pivoting LU.

    Raises SingularMatrixError when a pivot falls below 1e-14 * ||A||_F.
    """
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, b is {b.shape}")
    lu, piv = sla.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() < 1e-14 * np.linalg.norm(A):
        raise SingularMatrixError(f"singular matrix (min pivot {pivots.min():.3e})")
    z = sla.lu_solve((lu, piv), b)
    if not np.all(np.isfinite(z)):
        raise SingularMatrixError("non-finite solution")
    return z


def sym_eig(S):
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending.

    Returns (lam, psi) with S @ psi[:, j] = lam[j] * psi[:, j].
    """
    S = as_sym(S)
    try:
        lam, psi = sla.eigh(S, driver="evr")
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK non-convergence
        raise np.linalg.LinAlgError(f"eigensolver did not converge: {exc}") from exc
    return lam[::-1].copy(), psi[:, ::-1].copy()


def sym_eigvals(S):
    """Eigenvalues only (ascending); cheaper than sym_eig."""
    return sla.eigh(S, eigvals_only=True, check_finite=False)


def gen_sym_eig(A, B):
    """Generalized problem A psi = lam B psi with B symmetric positive definite.

    Eigenvalues are returned in descending order and the eigenvectors are
    B-orthonormal.
    """
    A = as_sym(A)
    B = as_sym(B)
    try:
        L = sla.cholesky(B, lower=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError("B is not positive definite") from exc
    # reduce to standard form L^-1 A L^-T
    tmp = sla.solve_triangular(L, A, lower=True)
    Ar = sla.solve_triangular(L, tmp.T, lower=True)
    lam, v = sym_eig(0.5 * (Ar + Ar.T))
    psi = sla.solve_triangular(L, v, lower=True, trans="T")
    return lam, psi


def chol_spd_solve(S, rhs):
    """Solve S x = rhs for symmetric positive definite S via Cholesky."""
    S = np.asarray(S, dtype=float)
    try:
        c = sla.cho_factor(S, lower=True, check_finite=True)
    except sla.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    return sla.cho_solve(c, rhs)
