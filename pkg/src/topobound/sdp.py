"""Semidefinite relaxation of the lifted QCQP and a dense interior-point solver.

The relaxation replaces x x^T by a PSD matrix X:

    maximize <P', X>  s.t.  <Q', X> = 1,  <A'_j, X> <= 0,  <B'_j, X> = 0,  X >= 0.

The solver is a primal-dual path-following method with Nesterov-Todd
scaling and Mehrotra predictor-corrector steps. Constraints given as
V S V^T with a thin factor V (the per-dof constraints) never get formed as
dense matrices; the Schur complement is built from the small blocks of
V^T W V instead.

Internally the problem is solved in minimization form

    min <C, X>  s.t.  <A_i, X> + s_i = b_i (s_i >= 0 for inequalities),

with C = -P' and dual  max b^T y  s.t.  Z = C - sum y_i A_i >= 0,
w = -y_I >= 0. The reported bound is -b^T y, valid whenever (y, Z, w) is
dual feasible.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .numerics import NotPositiveDefiniteError, sym_eigvals
from .qcqp import S_BOX, S_CROSS

MAX_SIDE = 4000
_FINAL = ("optimal", "unbounded", "infeasible")
RESCALE_SPREAD = 1e3  # restart with diagonal scaling only beyond this diag(X) spread


class SdpTooLargeError(ValueError):
    pass


class SdpSolveError(RuntimeError):
    pass


@dataclass
class FactoredConstraints:
    """Constraints <V_g S_{g,t} V_g^T, X> (sense_t) rhs_{g,t} for every group g."""

    V: np.ndarray  # (n_groups, side, k)
    cores: np.ndarray  # (n_groups, T, k, k)
    senses: tuple  # length T, "<=" or "="
    rhs: np.ndarray  # (n_groups, T)
    labels: tuple = ()

    @property
    def count(self):
        return self.cores.shape[0] * self.cores.shape[1]

    def matrix(self, g, t):
        V = self.V[g]
        return V @ self.cores[g, t] @ V.T


@dataclass
class DenseConstraint:
    matrix: np.ndarray
    sense: str
    rhs: float
    label: str = ""


@dataclass
class SdpProblem:
    """maximize <P, X> over PSD X subject to dense and factored constraints."""

    P: np.ndarray
    dense: list = field(default_factory=list)
    factored: FactoredConstraints | None = None

    @property
    def side(self):
        return self.P.shape[0]

    @property
    def n_constraints(self):
        return len(self.dense) + (self.factored.count if self.factored is not None else 0)

    def constraints(self):
        """Iterate (matrix, sense, rhs, label) in solver order (dense first)."""
        for c in self.dense:
            yield c.matrix, c.sense, c.rhs, c.label
        F = self.factored
        if F is not None:
            for g in range(F.cores.shape[0]):
                for t in range(F.cores.shape[1]):
                    label = f"{F.labels[t]}[{g}]" if F.labels else f"group{g}/{t}"
                    yield F.matrix(g, t), F.senses[t], float(F.rhs[g, t]), label

    def senses(self):
        out = [c.sense for c in self.dense]
        if self.factored is not None:
            out += list(self.factored.senses) * self.factored.cores.shape[0]
        return out

    def rhs(self):
        out = [c.rhs for c in self.dense]
        if self.factored is not None:
            out += list(self.factored.rhs.ravel())
        return np.asarray(out, dtype=float)

    def apply(self, X):
        """Constraint values <A_i, X> in solver order."""
        return _Operator(self).apply(X)


@dataclass
class SdpSolution:
    X: np.ndarray
    y: np.ndarray  # multipliers of the minimization form (y_i <= 0 on inequalities)
    Z: np.ndarray
    status: str
    iterations: int
    primal_objective: float  # <P, X>
    dual_objective: float  # the bound
    gap_history: list = field(default_factory=list)
    seconds: float = 0.0
    _eig: tuple | None = field(default=None, repr=False)

    @property
    def bound(self):
        return self.dual_objective

    @property
    def relative_gap(self):
        p, d = self.primal_objective, self.dual_objective
        return abs(d - p) / max(1.0, abs(d), abs(p))

    def eig(self):
        """Eigenpairs of X, descending (cached)."""
        if self._eig is None:
            from .numerics import sym_eig

            self._eig = sym_eig(self.X)
        return self._eig


def assemble_relaxation(qcqp, cross_correlation=None):
    """SdpProblem of a QcqpInstance (rank-one constraint dropped)."""
    use_cross = qcqp.cross_correlation if cross_correlation is None else cross_correlation
    N = qcqp.size
    if N > MAX_SIDE:
        raise SdpTooLargeError(
            f"matrix side {N} exceeds {MAX_SIDE}; every interior-point iteration costs "
            f"O(side^3) dense work and memory O(side^2) per matrix")
    V = qcqp.factors()
    ng = V.shape[0]
    shapes = [S_BOX] + ([S_CROSS] if use_cross else [])
    cores = np.broadcast_to(np.stack(shapes), (ng, len(shapes), 4, 4)).copy()
    senses = ("<=",) + (("=",) if use_cross else ())
    labels = ("box",) + (("cross",) if use_cross else ())
    F = FactoredConstraints(V, cores, senses, np.zeros((ng, len(shapes))), labels)
    return SdpProblem(qcqp.P.copy(), [DenseConstraint(qcqp.Q.copy(), "=", 1.0, "normalization")], F)


# ---------------------------------------------------------------- linear maps

class _Operator:
    """A(X), A*(y) and the NT Schur complement for an SdpProblem."""

    def __init__(self, prob, dense_scale=None, core_scale=None, x_scale=None):
        self.N = prob.side
        dx = np.ones(self.N) if x_scale is None else np.asarray(x_scale, float)
        self.dense = [dx[:, None] * c.matrix * dx[None, :] for c in prob.dense]
        if dense_scale is not None:
            self.dense = [A / s for A, s in zip(self.dense, dense_scale)]
        F = prob.factored
        if F is None:
            self.ng = 0
            self.k = 0
            self.T = 0
            self.V3 = np.zeros((self.N, 0, 0))
            self.Vflat = np.zeros((self.N, 0))
            self.cores = np.zeros((0, 0, 0, 0))
        else:
            self.ng, _, self.k = F.V.shape
            self.T = F.cores.shape[1]
            self.V3 = np.ascontiguousarray(np.transpose(F.V, (1, 0, 2)) * dx[:, None, None])
            self.Vflat = self.V3.reshape(self.N, -1)
            self.Vg = np.ascontiguousarray(np.transpose(self.V3, (1, 2, 0)))  # (ng, k, N)
            self.cores = F.cores if core_scale is None else F.cores / core_scale[:, :, None, None]
        self.nd = len(self.dense)
        self.m = self.nd + self.ng * self.T

    def apply(self, X):
        out = np.empty(self.m)
        for i, A in enumerate(self.dense):
            out[i] = np.vdot(A, X)
        if self.ng:
            Gx = self._gram(X @ self.Vflat)
            out[self.nd:] = np.einsum("gtab,gab->gt", self.cores, Gx).ravel()
        return out

    def adjoint(self, y):
        out = np.zeros((self.N, self.N))
        for i, A in enumerate(self.dense):
            if y[i]:
                out += y[i] * A
        if self.ng:
            Yg = np.einsum("gt,gtab->gab", y[self.nd:].reshape(self.ng, self.T), self.cores)
            T1 = np.matmul(Yg, self.Vg)  # (ng, k, N)
            out += self.Vflat @ T1.reshape(-1, self.N)
        return 0.5 * (out + out.T)

    def _gram(self, MV):
        """(ng, k, k) blocks V_g^T MV_g of an (N, ng*k) product MV."""
        MVg = np.transpose(MV.reshape(self.N, self.ng, self.k), (1, 0, 2))
        return np.matmul(self.Vg, MVg)

    def schur(self, W, chunk=64):
        """M_ij = <A_i, W A_j W>."""
        m, nd, ng, k, T = self.m, self.nd, self.ng, self.k, self.T
        M = np.empty((m, m))
        WA = [W @ A @ W for A in self.dense]
        for i in range(nd):
            for j in range(nd):
                M[i, j] = np.vdot(WA[i], self.dense[j])
        if ng:
            for i in range(nd):
                B = self._gram(WA[i] @ self.Vflat)
                row = np.einsum("gtab,gab->gt", self.cores, B).ravel()
                M[i, nd:] = row
                M[nd:, i] = row
            G = (self.Vflat.T @ (W @ self.Vflat)).reshape(ng, k, ng, k)
            Mb = M[nd:, nd:].reshape(ng, T, ng, T)
            for s in range(0, ng, chunk):
                Gc = G[s:s + chunk]
                SG = np.einsum("ctab,cbhd->ctahd", self.cores[s:s + chunk], Gc)
                GS = np.einsum("cahd,hude->cahue", Gc, self.cores)
                Mb[s:s + chunk] = np.einsum("ctahd,cahud->cthu", SG, GS)
            M[nd:, nd:] = Mb.reshape(ng * T, ng * T)
        return 0.5 * (M + M.T)

    def factor_norms(self):
        """Frobenius norms of the factored constraint matrices, (ng, T)."""
        Gv = self._gram(self.Vflat)
        SG = np.einsum("gtab,gbc->gtac", self.cores, Gv)
        return np.sqrt(np.maximum(np.einsum("gtab,gtba->gt", SG, SG), 0.0))


# ---------------------------------------------------------------- solver

def _chol(S, what):
    try:
        return sla.cholesky(S, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{what} lost positive definiteness") from exc


def _nt_spectrum(B):
    """Singular values and right singular vectors (as rows) of B = L_Z^T L_X.

    The eigendecomposition of B^T B is cheaper than an SVD and accurate while
    the squared spectrum stays within 1e10; otherwise fall back to the SVD.
    """
    w, U = sla.eigh(B.T @ B, driver="evd", check_finite=False)
    if w[0] > 1e-10 * w[-1]:
        return np.sqrt(w), U.T
    _, lam, Vt = sla.svd(B)
    return lam, Vt


def _min_eig(S):
    """Smallest eigenvalue of a symmetric matrix (Lanczos, dense fallback)."""
    if S.shape[0] > 200:
        try:
            return eigsh(S, k=1, which="SA", tol=1e-10, return_eigenvectors=False)[0]
        except ArpackNoConvergence:
            pass
    return sla.eigh(S, eigvals_only=True, subset_by_index=[0, 0], driver="evr",
                    check_finite=False)[0]


def _max_step(lam_half_inv, Dt):
    """Largest a with I + a L^-1/2 Dt L^-1/2 PSD (inf if unconstrained)."""
    S = lam_half_inv[:, None] * Dt * lam_half_inv[None, :]
    ev = _min_eig(0.5 * (S + S.T))
    return np.inf if ev >= 0 else -1.0 / ev


def _backtrack(S, dS, a, tries=30):
    """Shrink a until S + a dS has a Cholesky factor."""
    for _ in range(tries):
        T = S + a * dS
        T = 0.5 * (T + T.T)
        try:
            sla.cholesky(T, lower=True)
            return T, a
        except np.linalg.LinAlgError:
            a *= 0.5
    return None, 0.0


def _max_step_vec(v, dv):
    neg = dv < 0
    return np.min(-v[neg] / dv[neg]) if np.any(neg) else np.inf


def solve_sdp(prob, tol=1e-7, max_iter=200, x_scale=None, step=0.98, rescale_after=25,
              verbose=False):
    """Solve the relaxation; see the module docstring for conventions.

    Status is "optimal" when the relative gap and both infeasibilities are
    below tol. Otherwise ("stalled", "max_iter") the iterate with the
    smallest of those three errors is returned.

    When the field part of X is orders of magnitude larger than the
    normalized entry, the iteration stalls on primal feasibility. If there
    is no convergence after `rescale_after` iterations and diag(X) spans more
    than RESCALE_SPREAD, the variables
    are rescaled by sqrt(diag X) of the best iterate and the method is
    restarted once with the remaining iterations. None disables this.
    """
    if tol < 1e-12:
        raise ValueError("tolerance below 1e-12 is not attainable in double precision")
    t0 = time.perf_counter()
    N = prob.side
    if N > MAX_SIDE:
        raise SdpTooLargeError(f"matrix side {N} exceeds {MAX_SIDE}")
    senses = prob.senses()
    bad = [s for s in senses if s not in ("<=", "=")]
    if bad:
        raise ValueError(f"unknown constraint senses {set(bad)}")

    dx = np.ones(N) if x_scale is None else np.asarray(x_scale, float)
    run = _interior_point(prob, dx, tol, max_iter, step, verbose, rescale_at=rescale_after)
    if run.status == "rescale":
        d = np.diag(run.X)
        dx = np.sqrt(np.maximum(d, 1e-12 * d.max()))
        if verbose:
            print(f"rescaling: sqrt(diag X) in [{dx.min():.3e}, {dx.max():.3e}]")
        again = _interior_point(prob, dx, tol, max_iter - run.iterations, step, verbose)
        again.iterations += run.iterations
        again.history = run.history + again.history
        if again.err > run.err and again.status not in _FINAL:
            again.X, again.y, again.Z, again.err = run.X, run.y, run.Z, run.err
        run = again
    primal = float(np.vdot(prob.P, run.X))
    dual = -float(prob.rhs() @ run.y)
    if run.status == "unbounded":
        dual = np.inf
    return SdpSolution(run.X, run.y, run.Z, run.status, run.iterations, primal, dual,
                       run.history, time.perf_counter() - t0)


@dataclass
class _Run:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    status: str
    iterations: int
    err: float
    history: list


def _interior_point(prob, dx, tol, max_iter, step, verbose, rescale_at=None):
    """Predictor-corrector iterations on the problem with X replaced by D X D, D = diag(dx)."""
    N = prob.side
    senses = prob.senses()

    # normalize constraints and objective
    raw = _Operator(prob, x_scale=dx)
    dnorm = np.array([max(np.linalg.norm(A), 1e-300) for A in raw.dense])
    fnorm = raw.factor_norms() if raw.ng else None
    if fnorm is not None:
        fnorm = np.where(fnorm > 0, fnorm, 1.0)
    op = _Operator(prob, dense_scale=dnorm, core_scale=fnorm, x_scale=dx)
    scales = np.concatenate([dnorm, fnorm.ravel() if fnorm is not None else []])
    Cm = -(dx[:, None] * prob.P * dx[None, :])
    cnorm = max(np.linalg.norm(Cm), 1e-300)
    Cm = Cm / cnorm
    b = prob.rhs() / scales
    ineq = np.array([s == "<=" for s in senses])
    mI = int(ineq.sum())
    m = op.m

    # starting point
    xi = max(10.0, np.sqrt(N), N * np.max((1.0 + np.abs(b)) / 2.0))
    eta = max(10.0, np.sqrt(N), 1.0 + np.linalg.norm(Cm))
    X = xi * np.eye(N)
    Z = eta * np.eye(N)
    y = np.zeros(m)
    s = np.full(mI, xi)
    w = np.full(mI, eta)
    I = np.eye(N)
    trace0 = np.trace(X)
    hist = []
    best = None
    status = "max_iter"
    it = 0
    nb = 1.0 + np.linalg.norm(b)
    nc = 1.0 + np.linalg.norm(Cm)

    def Es(v):
        out = np.zeros(m)
        out[ineq] = v
        return out

    for it in range(1, max_iter + 1):
        AX = op.apply(X)
        rp = b - AX - Es(s)
        Rd = Cm - op.adjoint(y) - Z
        rw = -y[ineq] - w
        pobj = float(np.vdot(Cm, X))
        dobj = float(b @ y)
        mu = (np.vdot(X, Z) + s @ w) / (N + mI)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / nb
        dinf = (np.linalg.norm(Rd) + np.linalg.norm(rw)) / nc
        hist.append(gap)
        err = max(gap, pinf, dinf)
        if best is None or err < best[0]:
            best = (err, X, Z, y)
        if verbose:
            print(f"{it:3d} p={pobj:+.8e} d={dobj:+.8e} gap={gap:.2e} pinf={pinf:.2e} dinf={dinf:.2e}")
        if gap <= tol and pinf <= tol and dinf <= tol:
            status = "optimal"
            break
        if np.trace(X) > 1e10 * trace0 and pobj < -1e8 * (1.0 + abs(dobj)):
            status = "unbounded"
            break
        if np.trace(Z) > 1e12 * eta * N and dobj > 1e8:
            status = "infeasible"
            break
        if it == rescale_at and it < max_iter:
            d = dx**2 * np.diag(best[1])
            if d.max() > RESCALE_SPREAD * d.min():
                status = "rescale"
                break

        L1 = _chol(X, "X")
        L2 = _chol(Z, "Z")
        lam, Vt = _nt_spectrum(L2.T @ L1)
        lam = np.maximum(lam, 1e-300)
        R = (L1 @ Vt.T) / np.sqrt(lam)[None, :]
        Rinv = np.sqrt(lam)[:, None] * sla.solve_triangular(L1, Vt.T, lower=True, trans="T").T
        W = R @ R.T
        W = 0.5 * (W + W.T)
        dsc2 = s / w
        dsc = np.sqrt(dsc2)
        lams = np.sqrt(s * w)
        lhi = 1.0 / np.sqrt(lam)

        M = op.schur(W)
        M[ineq, ineq] += dsc2
        try:
            Mf = sla.cho_factor(M, lower=True)
            solveM = lambda r: sla.cho_solve(Mf, r)
        except np.linalg.LinAlgError:
            lu = sla.lu_factor(M + 1e-14 * np.trace(M) / m * np.eye(m))
            solveM = lambda r: sla.lu_solve(lu, r)
        WRdW = W @ Rd @ W

        def direction(RHR, ks):
            rhs = rp - op.apply(RHR - WRdW) - Es(dsc * ks - dsc2 * rw)
            dy = solveM(rhs)
            dZ = Rd - op.adjoint(dy)
            dX = RHR - W @ dZ @ W
            dX = 0.5 * (dX + dX.T)
            dw = rw - dy[ineq]
            ds = dsc * ks - dsc2 * dw
            return dX, dy, dZ, ds, dw

        # predictor
        dX, dy, dZ, ds, dw = direction(-X, -lams)
        dXt = Rinv @ dX @ Rinv.T
        dZt = R.T @ dZ @ R
        ap = min(1.0, _max_step(lhi, dXt), _max_step_vec(s, ds))
        ad = min(1.0, _max_step(lhi, dZt), _max_step_vec(w, dw))
        mu_aff = (np.vdot(X + ap * dX, Z + ad * dZ) + (s + ap * ds) @ (w + ad * dw)) / (N + mI)
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))

        # corrector
        corr = 0.5 * (dXt @ dZt + dZt @ dXt)
        Tm = sigma * mu * I - np.diag(lam**2) - corr
        H = 2.0 * Tm / (lam[:, None] + lam[None, :])
        ks = (sigma * mu - lams**2 - ds * dw) / lams
        dX, dy, dZ, ds, dw = direction(R @ H @ R.T, ks)
        dXt = Rinv @ dX @ Rinv.T
        dZt = R.T @ dZ @ R
        ap = min(1.0, step * _max_step(lhi, dXt), step * _max_step_vec(s, ds))
        ad = min(1.0, step * _max_step(lhi, dZt), step * _max_step_vec(w, dw))
        # rounding can still push a tiny eigenvalue across zero: back off
        X_new, ap = _backtrack(X, dX, ap)
        Z_new, ad = _backtrack(Z, dZ, ad)
        if X_new is None or Z_new is None or max(ap, ad) < 1e-10:
            status = "stalled"
            break
        X, Z = X_new, Z_new
        s = s + ap * ds
        y = y + ad * dy
        w = w + ad * dw

    if status not in ("optimal", "unbounded") and best is not None:  # includes "rescale"
        err, X, Z, y = best
    else:
        err = best[0] if best is not None else np.inf

    # undo scalings: <A_i, X> rows scaled by 1/scale_i, objective by 1/cnorm
    y_out = cnorm * y / scales
    X_out = dx[:, None] * X * dx[None, :]
    Z_out = cnorm * Z / dx[:, None] / dx[None, :]
    return _Run(X_out, y_out, Z_out, status, it, err, hist)


# ---------------------------------------------------------------- certificate

@dataclass
class CertificateReport:
    passed: bool
    primal_residual: float
    inequality_violation: float
    min_eig_X: float
    min_eig_Z: float
    dual_sign_violation: float
    complementarity: float
    relative_gap: float
    messages: list = field(default_factory=list)


def verify_certificate(prob, sol, tol=1e-6):
    """Re-derive feasibility and duality of a solution from the problem data.

    The dual slack is recomputed as Z = -P - sum y_i A_i from the returned
    multipliers rather than taken from the solver.
    """
    msgs = []
    X = sol.X
    y = sol.y
    senses = np.array(prob.senses())
    rhs = prob.rhs()
    vals = prob.apply(X)
    eq = senses == "="
    ineq = ~eq
    scale = 1.0 + np.abs(rhs)
    trX = max(np.trace(X), 1e-300)
    nrm = np.array([np.linalg.norm(A) for A, *_ in prob.constraints()])
    res_eq = np.max(np.abs(vals[eq] - rhs[eq]) / (scale[eq] * (1.0 + nrm[eq] * trX)), initial=0.0)
    viol_in = np.max(np.maximum(vals[ineq] - rhs[ineq], 0.0) / (scale[ineq] * (1.0 + nrm[ineq] * trX)),
                     initial=0.0)

    Z = -prob.P - _Operator(prob).adjoint(y)
    eX = sym_eigvals(X)
    eZ = sym_eigvals(Z)
    nP = max(np.linalg.norm(prob.P), 1e-300)
    sign = np.max(np.maximum(y[ineq], 0.0), initial=0.0) / nP
    comp = abs(np.vdot(Z, X)) / (nP * trX)
    dual = -float(rhs @ y)
    primal = float(np.vdot(prob.P, X))
    gap = abs(dual - primal) / max(1.0, abs(dual), abs(primal))

    ok = True
    if eX[0] < -1e-8 * trX:
        ok = False
        msgs.append(f"X not PSD: min eigenvalue {eX[0]:.3e}")
    if eZ[0] < -tol * nP:
        ok = False
        msgs.append(f"dual slack not PSD: min eigenvalue {eZ[0]:.3e}")
    if res_eq > tol or viol_in > tol:
        ok = False
        msgs.append(f"primal residual {res_eq:.3e}, inequality violation {viol_in:.3e}")
    if sign > tol:
        ok = False
        msgs.append(f"inequality multipliers of wrong sign ({sign:.3e})")
    if gap > tol:
        ok = False
        msgs.append(f"duality gap {gap:.3e}")
    if comp > tol:
        ok = False
        msgs.append(f"complementarity <Z, X> = {comp:.3e}")
    return CertificateReport(ok, res_eq, viol_in, float(eX[0]), float(eZ[0]), sign, comp, gap, msgs)


# ---------------------------------------------------------------- text format

def export_sdp(prob, path):
    """Write the problem as sparse triples.

    Header comment lines give the side, constraint count and one
    `# constraint <j> <sense> <rhs>` line per constraint (j from 1). Body
    lines `j i k value` list the upper triangle (1-based i <= k) of matrix
    j, where j = 0 is the maximized objective.
    """
    with open(path, "w") as fh:
        fh.write("# sdp-triples 1\n")
        fh.write(f"# side {prob.side}\n")
        fh.write(f"# constraints {prob.n_constraints}\n")
        mats = [prob.P] + [A for A, *_ in prob.constraints()]
        for j, (_, sense, rhs, label) in enumerate(prob.constraints(), start=1):
            fh.write(f"# constraint {j} {sense} {float(rhs)!r} {label}\n")
        for j, A in enumerate(mats):
            iu, ku = np.triu_indices(prob.side)
            v = A[iu, ku]
            nz = v != 0
            for i, k, val in zip(iu[nz], ku[nz], v[nz]):
                fh.write(f"{j} {i + 1} {k + 1} {float(val)!r}\n")


class SdpFormatError(ValueError):
    pass


def read_sdp(path):
    """Read a file written by export_sdp into an SdpProblem (dense constraints)."""
    side = count = None
    cons = {}
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["side"]:
                    side = int(parts[1])
                elif parts[:1] == ["constraints"]:
                    count = int(parts[1])
                elif parts[:1] == ["constraint"]:
                    if parts[2] not in ("<=", "="):
                        raise SdpFormatError(f"line {lineno}: bad sense {parts[2]!r}")
                    cons[int(parts[1])] = (parts[2], float(parts[3]), " ".join(parts[4:]))
                continue
            parts = line.split()
            if len(parts) != 4:
                raise SdpFormatError(f"line {lineno}: expected 'j i k value'")
            entries.append((int(parts[0]), int(parts[1]) - 1, int(parts[2]) - 1, float(parts[3])))
    if side is None or count is None:
        raise SdpFormatError("missing side or constraint count header")
    if sorted(cons) != list(range(1, count + 1)):
        raise SdpFormatError("constraint headers do not cover 1..m")
    mats = np.zeros((count + 1, side, side))
    for j, i, k, v in entries:
        if not (0 <= j <= count and 0 <= i < side and 0 <= k < side):
            raise SdpFormatError(f"entry ({j}, {i + 1}, {k + 1}) out of range")
        mats[j, i, k] = v
        mats[j, k, i] = v
    dense = [DenseConstraint(mats[j], *cons[j]) for j in range(1, count + 1)]
    return SdpProblem(mats[0], dense, None)
