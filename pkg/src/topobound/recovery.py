"""Candidate designs from the relaxed solution X.

X is approximated by its leading eigenpairs, x_hat = sum_j sqrt(lam_j) psi_j,
and the design is read off row by row. The real rows (1..n) and the
imaginary rows (n+1..2n) each give a design; they agree only when x_hat is
a genuine lifted point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import sym_eig

RANK_RTOL = 1e-6  # numerical rank: #{lam_j > RANK_RTOL * lam_1}
EXHAUSTED_RTOL = 1e-10  # rank_r_recover refuses r beyond #{lam_j > this * lam_1}
INDETERMINATE_RTOL = 1e-12


class RankError(ValueError):
    pass


@dataclass
class RankApproximation:
    rank: int
    x: np.ndarray
    theta_a: np.ndarray  # from the real rows, reduced dofs
    theta_b: np.ndarray  # from the imaginary rows
    indeterminate_a: np.ndarray
    indeterminate_b: np.ndarray
    eigenvalues: np.ndarray
    dofs: np.ndarray  # original dof index of each reduced entry
    theta_fit: np.ndarray | None = None  # least-squares fit over both halves
    value: float = float("nan")

    @property
    def numerical_rank(self):
        return numerical_rank(self.eigenvalues)

    def projected(self, half="a"):
        return project_box(self.theta_a if half == "a" else self.theta_b)


def numerical_rank(eigenvalues, rtol=RANK_RTOL):
    lam = np.sort(np.asarray(eigenvalues, float))[::-1]
    if lam.size == 0 or lam[0] <= 0:
        return 0
    return int(np.sum(lam > rtol * lam[0]))


def _halves(qcqp, x):
    n = qcqp.n
    ax = qcqp.a_vecs @ x
    ex = qcqp.e_vecs @ x
    ynorm = max(np.linalg.norm(x[:-1]), 1e-300)
    out = []
    for rows in (slice(0, n), slice(n, 2 * n)):
        den = ex[rows]
        bad = np.abs(den) <= INDETERMINATE_RTOL * ynorm
        theta = np.divide(-ax[rows], den, out=np.zeros(n), where=~bad)
        out += [theta, bad]
    return out


def rank_r_recover(X, r, qcqp):
    """Designs from the rank-r approximation of X.

    The sign of each eigenvector is fixed so that its alpha entry is
    non-negative. Each term sqrt(lam_j) psi_j is formed as X psi_j / sqrt(lam_j),
    which is the same vector for exact eigenpairs but carries componentwise
    (not just normwise) accuracy, so small field entries keep their digits.
    """
    lam, vecs = sym_eig(X)
    if r < 1:
        raise RankError("rank must be at least 1")
    if lam[0] <= 0 or r > np.sum(lam > EXHAUSTED_RTOL * lam[0]):
        raise RankError(f"rank {r} exceeds the numerical rank of X")
    x = np.zeros(X.shape[0])
    for j in range(r):
        v = vecs[:, j]
        if v[-1] < 0:
            v = -v
        x += (X @ v) / np.sqrt(lam[j])
    ta, ba, tb, bb = _halves(qcqp, x)
    fit, _ = qcqp.recover_theta(x)
    return RankApproximation(r, x, ta, tb, ba, bb, lam, np.asarray(qcqp.dofs), fit)


def project_box(theta):
    return np.clip(np.asarray(theta, dtype=float), -1.0, 1.0)


def design_on_free(approx, problem, half="a"):
    """Projected design laid out on problem.free (dofs with d = 0 get 0)."""
    theta = np.zeros(problem.n_free)
    pos = {k: i for i, k in enumerate(problem.free)}
    idx = np.array([pos[k] for k in approx.dofs], dtype=int)
    theta[idx] = approx.projected(half)
    return theta


def evaluate_recovered(approx, problem, half="a"):
    """Objective of the projected design through the true state equation."""
    value = float(problem.value(design_on_free(approx, problem, half)))
    if half == "a":
        approx.value = value
    return value


def seed_topopt(approx, problem, half="a"):
    """Initial design for run_topopt."""
    return design_on_free(approx, problem, half)
