"""Homogenized real QCQP of an affine design problem.

The design variables are eliminated row by row: with A(theta) = C + diag(theta d),
row j of the real-split state equation gives theta_j = -(a_j . x)/(e_j . x)
for the lifted vector x = [Re y, Im y, alpha] and y = alpha z. The box
|theta_j| <= 1 becomes a quadratic inequality, and equality of the thetas
obtained from the real and imaginary rows a quadratic equality
("cross-correlation").

Every constraint of dof j is a quadratic form V_j S V_j^T built on the four
vectors V_j = [a_j, a_{n+j}, e_j, e_{n+j}], which the SDP solver exploits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fem import Condensation, DofPartition
from .objectives import QuadraticObjective

S_BOX = np.diag([1.0, 1.0, -1.0, -1.0])
S_CROSS = np.zeros((4, 4))
S_CROSS[0, 3] = S_CROSS[3, 0] = 0.5
S_CROSS[1, 2] = S_CROSS[2, 1] = -0.5


def real_split(C, d, b):
    """(C', D', b') of the real 2n representation."""
    C = np.asarray(C.toarray() if sp.issparse(C) else C, dtype=complex)
    d = np.asarray(d, dtype=complex)
    b = np.asarray(b, dtype=complex)
    Cp = np.block([[C.real, -C.imag], [C.imag, C.real]])
    D = np.diag(d)
    Dp = np.block([[D.real, -D.imag], [D.imag, D.real]])
    return Cp, Dp, np.concatenate([b.real, b.imag])


def hermitian_to_real(P, p, r):
    """(2n+1)-square real matrix M with x^T M x = y^H P y + 2 alpha Re(p^H y) + alpha^2 r."""
    P = np.asarray(P, dtype=complex)
    p = np.asarray(p, dtype=complex)
    n = P.shape[0]
    M = np.zeros((2 * n + 1, 2 * n + 1))
    M[:n, :n] = P.real
    M[:n, n:2 * n] = -P.imag
    M[n:2 * n, :n] = P.imag
    M[n:2 * n, n:2 * n] = P.real
    M[:n, -1] = M[-1, :n] = p.real
    M[n:2 * n, -1] = M[-1, n:2 * n] = p.imag
    M[-1, -1] = r
    return 0.5 * (M + M.T)


@dataclass
class QcqpInstance:
    """maximize x^T P' x  s.t.  x^T Q' x = 1, x^T A'_j x <= 0, x^T B'_j x = 0."""

    C: np.ndarray  # condensed complex system, n x n
    d: np.ndarray
    b: np.ndarray
    P: np.ndarray  # P', (2n+1)^2
    Q: np.ndarray  # Q'
    objective: QuadraticObjective  # in the reduced state
    cross_correlation: bool = True
    dofs: np.ndarray | None = None  # original indices of the reduced state
    reconstruct: object = field(default=None, repr=False)  # reduced z -> full z

    def __post_init__(self):
        Cp, Dp, bp = real_split(self.C, self.d, self.b)
        n2 = Cp.shape[0]
        self.a_vecs = np.hstack([Cp, -bp[:, None]])  # rows a_k
        self.e_vecs = np.hstack([Dp, np.zeros((n2, 1))])  # rows e_k

    @property
    def n(self):
        return self.d.size

    @property
    def size(self):
        return 2 * self.n + 1

    @property
    def n_constraints(self):
        return 1 + self.n * (2 if self.cross_correlation else 1)

    def factors(self):
        """(n, 2n+1, 4) stack of V_j = [a_j, a_{n+j}, e_j, e_{n+j}]."""
        n = self.n
        V = np.stack([self.a_vecs[:n], self.a_vecs[n:], self.e_vecs[:n], self.e_vecs[n:]], axis=2)
        return V

    def A_matrix(self, j):
        V = self.factors()[j]
        return V @ S_BOX @ V.T

    def B_matrix(self, j):
        V = self.factors()[j]
        return V @ S_CROSS @ V.T

    def residuals(self, x):
        """(box, cross, normalization) residuals at a lifted point x."""
        ax = self.a_vecs @ x
        ex = self.e_vecs @ x
        n = self.n
        box = ax[:n] ** 2 + ax[n:] ** 2 - ex[:n] ** 2 - ex[n:] ** 2
        cross = ax[:n] * ex[n:] - ax[n:] * ex[:n]
        return box, cross, x @ self.Q @ x - 1.0

    def value(self, x):
        return float(x @ self.P @ x)

    def lift(self, z):
        """x = [Re y, Im y, alpha] with y = alpha z scaled so x^T Q' x = 1."""
        z = np.asarray(z, dtype=complex)
        den = self.objective.denominator(z)
        if den <= 0:
            raise ValueError("objective denominator must be positive to lift")
        alpha = 1.0 / np.sqrt(den)
        return np.concatenate([alpha * z.real, alpha * z.imag, [alpha]])

    def lift_theta(self, theta):
        """Lifted point of the design theta (reduced dofs)."""
        A = self.C + np.diag(np.asarray(theta) * self.d)
        from .numerics import solve_complex_linear

        return self.lift(solve_complex_linear(A, self.b))

    def recover_theta(self, x, rtol=1e-10):
        """theta_j from a lifted point: least-squares fit over both split rows.

        Returns (theta, indeterminate) where indeterminate flags rows whose
        design coefficient d_j y_j vanishes.
        """
        ax = self.a_vecs @ x
        ex = self.e_vecs @ x
        n = self.n
        den = ex[:n] ** 2 + ex[n:] ** 2
        num = -(ax[:n] * ex[:n] + ax[n:] * ex[n:])
        scale = max(np.max(den), 1e-300)
        bad = den <= rtol * scale
        theta = np.divide(num, den, out=np.zeros(n), where=~bad)
        return theta, bad

    def state(self, x):
        """Reduced complex state z = y / alpha of a lifted point."""
        n = self.n
        return (x[:n] + 1j * x[n:2 * n]) / x[-1]


def _composition_map(cond, part, support, b):
    """z[support] = g + G z_f for the condensed state z_f."""
    pos_f = {k: i for i, k in enumerate(part.f)}
    pos_c = {k: i for i, k in enumerate(part.c)}
    nf = part.f.size
    G = np.zeros((support.size, nf), dtype=complex)
    g = np.zeros(support.size, dtype=complex)
    passive = [i for i, k in enumerate(support) if k in pos_c]
    if passive:
        rows = np.array([pos_c[support[i]] for i in passive])
        g_c, G_c = cond.passive_rows(b, rows)
        G[passive] = G_c
        g[passive] = g_c
    for i, k in enumerate(support):
        if k in pos_f:
            G[i, pos_f[k]] = 1.0
    return g, G


def build_qcqp(problem, cross_correlation=True):
    """Reduce a DesignProblem to a QcqpInstance on its designable dofs.

    Passive dofs (fixed theta) and designable dofs with d_j = 0 are
    eliminated exactly by static condensation, so every remaining row
    carries a design variable.
    """
    folded = problem.folded_system()
    n = folded.n
    d = folded.d
    free = np.asarray(problem.free, dtype=int)
    active = free[d[free] != 0]
    part = DofPartition.from_free(active, n)
    support = problem.objective.support()
    cond = Condensation(folded.C, part, keep_rows=np.searchsorted(part.c, np.intersect1d(support, part.c)))
    C = cond.A_tilde
    b = cond.rhs(folded.b)
    g, G = _composition_map(cond, part, support, folded.b)
    obj = problem.objective.compose(G, g, support)
    P = hermitian_to_real(obj.P, obj.p, obj.r)
    Q = hermitian_to_real(obj.Q, obj.q, obj.s)

    def reconstruct(z_f):
        return cond.expand(z_f, folded.b)

    return QcqpInstance(C, d[part.f].copy(), b, P, Q, obj, cross_correlation,
                        dofs=part.f.copy(), reconstruct=reconstruct)


def build_qcqp_direct(C, d, b, objective, cross_correlation=True):
    """QcqpInstance of a small dense system whose every row is designable."""
    d = np.asarray(d, dtype=complex)
    if np.any(d == 0):
        raise ValueError("every row needs a nonzero design coefficient; condense the others")
    C = np.asarray(C.toarray() if sp.issparse(C) else C, dtype=complex)
    P = hermitian_to_real(_dense(objective.P), objective.p, objective.r)
    Q = hermitian_to_real(_dense(objective.Q), objective.q, objective.s)
    return QcqpInstance(C, d, np.asarray(b, complex), P, Q, objective, cross_correlation,
                        dofs=np.arange(d.size))


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)
