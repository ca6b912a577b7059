"""Fractional quadratic objectives

    f(z) = (z^H P z + 2 Re(p^H z) + r) / (z^H Q z + 2 Re(q^H z) + s)

with P, Q Hermitian (real symmetric in the common case), their state
gradients and their composition with affine field maps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class ZeroDenominatorError(ZeroDivisionError):
    pass


def _quad(M, z):
    return np.real(np.vdot(z, M @ z))


@dataclass
class QuadraticObjective:
    P: object  # dense ndarray or scipy sparse, Hermitian
    Q: object
    p: np.ndarray
    q: np.ndarray
    r: float = 0.0
    s: float = 0.0
    S: np.ndarray | None = None  # output index set
    c: np.ndarray | None = None  # target profile on S

    @property
    def n(self):
        return self.P.shape[0]

    def numerator(self, z):
        return _quad(self.P, z) + 2.0 * np.real(np.vdot(self.p, z)) + self.r

    def denominator(self, z):
        return _quad(self.Q, z) + 2.0 * np.real(np.vdot(self.q, z)) + self.s

    def support(self):
        """Indices touched by P, Q, p or q (sorted)."""
        idx = [np.flatnonzero(self.p), np.flatnonzero(self.q)]
        for M in (self.P, self.Q):
            if sp.issparse(M):
                M = sp.coo_matrix(M)
                idx += [M.row[M.data != 0], M.col[M.data != 0]]
            else:
                nz = np.flatnonzero(np.any(np.asarray(M) != 0, axis=1))
                idx.append(nz)
        return np.unique(np.concatenate(idx)).astype(int)

    def dense_blocks(self, support=None):
        """P, Q, p, q restricted to `support` as dense arrays."""
        idx = self.support() if support is None else np.asarray(support)

        def sub(M):
            if sp.issparse(M):
                return sp.csr_matrix(M)[idx][:, idx].toarray()
            return np.asarray(M)[np.ix_(idx, idx)]

        return idx, sub(self.P), sub(self.Q), self.p[idx], self.q[idx]

    def compose(self, G, g, support=None):
        """Objective in u for the affine field map z[support] = g + G u.

        Entries of z outside `support` must not enter the objective.
        """
        idx, P, Q, p, q = self.dense_blocks(support)
        G = np.asarray(G)
        g = np.asarray(g, dtype=complex)

        def part(M, v, c):
            Mg = M @ g
            Mn = G.conj().T @ M @ G
            Mn = 0.5 * (Mn + Mn.conj().T)
            vn = G.conj().T @ (Mg + v)
            cn = np.real(np.vdot(g, Mg)) + 2.0 * np.real(np.vdot(v, g)) + c
            return Mn, vn, cn

        Pn, pn, rn = part(P, p, self.r)
        Qn, qn, sn = part(Q, q, self.s)
        return QuadraticObjective(_realify(Pn), _realify(Qn), pn, qn, float(rn), float(sn))


def _realify(M, tol=0.0):
    M = np.asarray(M)
    if np.iscomplexobj(M) and np.all(np.abs(M.imag) <= tol * max(np.abs(M).max(), 1e-300)):
        return M.real.copy()
    return M


def _selection(c, S, n):
    c = np.asarray(c)
    S = np.asarray(S, dtype=int)
    if c.shape != S.shape:
        raise ValueError("target profile and index set differ in length")
    if S.size and (S.min() < 0 or S.max() >= n):
        raise ValueError("index set out of range")
    if not np.isclose(np.linalg.norm(c), 1.0, rtol=1e-10, atol=0):
        raise ValueError(f"target profile must have unit 2-norm, got {np.linalg.norm(c):.6g}")
    return c, S, _outer_sparse(c, S, n)


def _outer_sparse(c, S, n):
    rows = np.repeat(S, S.size)
    cols = np.tile(S, S.size)
    vals = np.outer(c, c.conj()).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def build_normalized_overlap(c, S, n):
    """f(z) = |c^H z_S|^2 / ||z_S||^2 with ||c|| = 1."""
    c, S, P = _selection(c, S, n)
    Q = sp.csr_matrix((np.ones(S.size), (S, S)), shape=(n, n))
    zero = np.zeros(n, dtype=complex)
    return QuadraticObjective(P, Q, zero, zero.copy(), 0.0, 0.0, S, c)


def build_overlap_magnitude(c, S, n):
    """f(z) = |c^H z_S|^2 with ||c|| = 1."""
    c, S, P = _selection(c, S, n)
    Q = sp.csr_matrix((n, n))
    zero = np.zeros(n, dtype=complex)
    return QuadraticObjective(P, Q, zero, zero.copy(), 0.0, 1.0, S, c)


def evaluate(obj, z):
    den = obj.denominator(z)
    if den == 0.0:
        raise ZeroDenominatorError("objective denominator vanishes")
    return obj.numerator(z) / den


def state_gradient(obj, z):
    """(df/dRe z, df/dIm z) for real or Hermitian P, Q.

    For real symmetric P this is 2 P Re z etc.; Hermitian P uses Re/Im of P z.
    """
    z = np.asarray(z, dtype=complex)
    num = obj.numerator(z)
    den = obj.denominator(z)
    if den == 0.0:
        raise ZeroDenominatorError("objective denominator vanishes")
    gn = 2.0 * (obj.P @ z + obj.p)
    gd = 2.0 * (obj.Q @ z + obj.q)
    g = gn / den - gd * (num / den**2)
    return np.real(g), np.imag(g)
