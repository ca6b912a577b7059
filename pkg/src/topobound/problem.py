"""Affine design systems A(theta) = C + diag(theta) diag(d) and design problems."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import DofPartition
from .numerics import SingularMatrixError
from .objectives import QuadraticObjective, evaluate


@dataclass
class AffineSystem:
    """A(theta) = C + diag(theta * d), right-hand side b."""

    C: object  # sparse or dense complex (n, n)
    d: np.ndarray
    b: np.ndarray

    @property
    def n(self):
        return self.d.size

    def matrix(self, theta):
        theta = np.asarray(theta, dtype=float)
        if sp.issparse(self.C):
            return sp.csc_matrix(self.C + sp.diags(theta * self.d))
        return np.asarray(self.C) + np.diag(theta * self.d)

    def solve(self, theta):
        return solve_state(self.matrix(theta), self.b)


class _Factorized:
    def __init__(self, A):
        self.sparse = sp.issparse(A)
        if self.sparse:
            try:
                self.lu = spla.splu(sp.csc_matrix(A))
            except RuntimeError as exc:
                raise SingularMatrixError(str(exc)) from exc
        else:
            from scipy.linalg import lu_factor

            self.lu = lu_factor(A)

    def solve(self, rhs, trans="N"):
        if self.sparse:
            out = self.lu.solve(np.asarray(rhs, dtype=complex), trans=trans)
        else:
            from scipy.linalg import lu_solve

            t = {"N": 0, "T": 1, "H": 2}[trans]
            out = lu_solve(self.lu, rhs, trans=t)
        if not np.all(np.isfinite(out)):
            raise SingularMatrixError("state solve produced non-finite values")
        return out


def solve_state(A, b):
    return _Factorized(A).solve(b)


def factorize(A):
    return _Factorized(A)


@dataclass
class DesignProblem:
    """A staggered design problem: maximize f(z) with A(theta) z = b.

    theta lives on all dofs; `free` lists the designable ones and
    `theta_fixed` carries the prescribed values of the passive dofs.
    `pamp` (optional) adds i*eta*pamp_j*(1 - theta_j^2) to the diagonal,
    i.e. density-dependent attenuation of intermediate designs.
    """

    system: AffineSystem
    free: np.ndarray
    theta_fixed: np.ndarray
    objective: QuadraticObjective
    name: str = "problem"
    pamp: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.system.n

    @property
    def n_free(self):
        return self.free.size

    @property
    def partition(self):
        return DofPartition.from_free(self.free, self.n)

    def full_theta(self, theta_f):
        theta = self.theta_fixed.astype(float).copy()
        theta[self.free] = theta_f
        return theta

    def diagonal(self, theta_f, eta=0.0):
        """Design-dependent diagonal psi(theta) and its derivative on free dofs."""
        theta = self.full_theta(theta_f)
        psi = theta * self.system.d
        dpsi = self.system.d[self.free].astype(complex)
        if eta and self.pamp is not None:
            psi = psi + 1j * eta * self.pamp * (1.0 - theta**2)
            dpsi = dpsi - 2j * eta * self.pamp[self.free] * theta[self.free]
        return psi, dpsi

    def matrix(self, theta_f, eta=0.0):
        psi, _ = self.diagonal(theta_f, eta)
        C = self.system.C
        if sp.issparse(C):
            return sp.csc_matrix(C + sp.diags(psi))
        return np.asarray(C) + np.diag(psi)

    def solve(self, theta_f, eta=0.0):
        return solve_state(self.matrix(theta_f, eta), self.system.b)

    def value(self, theta_f, eta=0.0):
        return evaluate(self.objective, self.solve(theta_f, eta))

    def folded_system(self):
        """System whose C carries the passive theta values (free theta = 0)."""
        theta = self.theta_fixed.astype(float).copy()
        theta[self.free] = 0.0
        C = self.system.C
        diag = theta * self.system.d
        C = sp.csr_matrix(C + sp.diags(diag)) if sp.issparse(C) else np.asarray(C) + np.diag(diag)
        d = np.zeros_like(self.system.d)
        d[self.free] = self.system.d[self.free]
        return AffineSystem(C, d, self.system.b.copy())
