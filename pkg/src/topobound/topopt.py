"""Staggered density-based topology optimization.

The state is eliminated through A(theta) z = b, sensitivities come from one
adjoint solve per iteration and the box-constrained update is a
method-of-moving-asymptotes step. An optional filter/projection/pamping
chain gives the conventional (regularized) variant.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .objectives import evaluate, state_gradient
from .problem import factorize


@dataclass(frozen=True)
class TopoptConfig:
    max_iter: int = 1000
    tol: float = 1e-3  # on max |d theta|
    maximize: bool = True
    # MMA
    asy_init: float = 0.5
    asy_shrink: float = 0.7
    asy_grow: float = 1.2
    move: float = 0.2
    asy_min: float = 1e-4  # smallest asymptote distance, fraction of the box width
    raa0: float = 1e-5
    # regularization; filter_radius is in element lengths, None disables
    filter_radius: float | None = None
    beta_init: float = 1.0
    beta_max: float = 8.0
    beta_every: int = 50
    eta: float = 0.0
    checkpoint_every: int = 50

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tolerance and iteration cap must be positive")
        if not 0 < self.asy_shrink < 1 < self.asy_grow:
            raise ValueError("need 0 < asy_shrink < 1 < asy_grow")
        if self.filter_radius is not None and self.filter_radius < 0:
            raise ValueError("filter radius must be non-negative")


@dataclass
class OptimizationHistory:
    objective: list = field(default_factory=list)
    change: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    converged: bool = False
    final_objective: float = float("nan")
    seconds: float = 0.0

    @property
    def iterations(self):
        return len(self.objective)


# ---------------------------------------------------------------- sensitivities

def adjoint_sensitivities(A, z, obj, dpsi, idx, lu=None):
    """df/dtheta for A(theta) = C + diag(psi(theta)) with psi depending on
    theta_j only through entry idx[j] (derivative dpsi[j]).

    With g = df/dRe z + i df/dIm z and A^H mu = g,
    df/dtheta_j = -Re(conj(mu_k) dpsi_j z_k), k = idx[j].
    """
    gr, gi = state_gradient(obj, z)
    g = gr + 1j * gi
    if not np.any(g):
        return np.zeros(len(idx))
    lu = factorize(A) if lu is None else lu
    mu = lu.solve(g, trans="H")
    idx = np.asarray(idx)
    return -np.real(np.conj(mu[idx]) * dpsi * z[idx])


def objective_and_gradient(problem, theta_f, eta=0.0):
    """(f, df/dtheta_free, z) of a DesignProblem at the free design theta_f."""
    A = problem.matrix(theta_f, eta)
    lu = factorize(A)
    z = lu.solve(problem.system.b)
    f = evaluate(problem.objective, z)
    _, dpsi = problem.diagonal(theta_f, eta)
    grad = adjoint_sensitivities(A, z, problem.objective, dpsi, problem.free, lu=lu)
    return f, grad, z


# ---------------------------------------------------------------- regularization

def filter_matrix(coords, radius):
    """Row-normalized cone filter H_jk ~ max(0, r - |x_j - x_k|)."""
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    if radius <= 0 or n == 0:
        return sp.identity(n, format="csr")
    tree = cKDTree(coords)
    D = tree.sparse_distance_matrix(tree, radius, output_type="coo_matrix")
    w = radius - D.data
    keep = w > 0
    H = sp.coo_matrix((w[keep], (D.row[keep], D.col[keep])), shape=(n, n)).tocsr()
    H = H + sp.diags(np.full(n, radius) - H.diagonal())  # self-distance 0 dropped by coo
    rows = np.asarray(H.sum(axis=1)).ravel()
    return sp.csr_matrix(sp.diags(1.0 / rows) @ H)


def density_filter(theta, H):
    return H @ np.asarray(theta, dtype=float)


def heaviside(theta_t, beta):
    """Projection around zero: tanh(beta x) / tanh(beta)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return np.tanh(beta * theta_t) / np.tanh(beta)


def heaviside_derivative(theta_t, beta):
    return beta * (1.0 - np.tanh(beta * theta_t) ** 2) / np.tanh(beta)


def pamping_interp(theta_bar, eps_r, eta):
    """Relative permittivity with density-dependent attenuation."""
    th = np.asarray(theta_bar, dtype=float)
    return 0.5 * (th * (eps_r - 1.0) + (eps_r + 1.0)) - 1j * eta * (th + 1.0) * (1.0 - th)


# ---------------------------------------------------------------- MMA

@dataclass
class MMAState:
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    x1: np.ndarray | None = None  # previous iterate
    x2: np.ndarray | None = None  # iterate before that


def mma_step(x, df, state, cfg=TopoptConfig(), lo=-1.0, hi=1.0):
    """One box-constrained MMA step for minimizing f (gradient df at x).

    Without general constraints the convex separable subproblem decouples
    per variable and its minimizer is available in closed form.
    """
    x = np.asarray(x, dtype=float)
    df = np.asarray(df, dtype=float)
    rng = hi - lo
    if state.x2 is None or state.lower is None:
        L = x - cfg.asy_init * rng
        U = x + cfg.asy_init * rng
    else:
        osc = (x - state.x1) * (state.x1 - state.x2)
        fac = np.where(osc > 0, cfg.asy_grow, np.where(osc < 0, cfg.asy_shrink, 1.0))
        L = x - fac * (state.x1 - state.lower)
        U = x + fac * (state.upper - state.x1)
        # a box-only model always steps close to the asymptote, so cycling
        # only dies out once the asymptotes may close in below the tolerance
        L = np.clip(L, x - 10.0 * rng, x - cfg.asy_min * rng)
        U = np.clip(U, x + cfg.asy_min * rng, x + 10.0 * rng)

    alpha = np.maximum.reduce([np.full_like(x, lo), L + 0.1 * (x - L), x - cfg.move * rng])
    beta = np.minimum.reduce([np.full_like(x, hi), U - 0.1 * (U - x), x + cfg.move * rng])

    dpos = np.maximum(df, 0.0)
    dneg = np.maximum(-df, 0.0)
    reg = cfg.raa0 / rng
    p = (U - x) ** 2 * (1.001 * dpos + 0.001 * dneg + reg)
    q = (x - L) ** 2 * (0.001 * dpos + 1.001 * dneg + reg)
    sp_, sq = np.sqrt(p), np.sqrt(q)
    x_new = np.clip((L * sp_ + U * sq) / (sp_ + sq), alpha, beta)

    state.x2 = state.x1 if state.x1 is not None else x.copy()
    state.x1 = x.copy()
    state.lower, state.upper = L, U
    return x_new


# ---------------------------------------------------------------- driver

def design_coordinates(problem):
    mesh = problem.meta.get("mesh")
    if mesh is None:
        return None, None
    npn = problem.meta.get("n_per_node", 1)
    nodes = problem.free // npn
    return mesh.coords[nodes], min(mesh.hx, mesh.hy)


def run_topopt(problem, config=TopoptConfig(), theta0=None, callback=None):
    """Optimize the free design of `problem`; returns (theta_physical, history).

    The returned design is the physical one (after filter and projection when
    those are active).
    """
    t0 = time.perf_counter()
    hist = OptimizationHistory()
    n = problem.n_free
    x = np.zeros(n) if theta0 is None else np.clip(np.asarray(theta0, float).copy(), -1, 1)
    if n == 0:
        hist.objective.append(float(problem.value(x)))
        hist.change.append(0.0)
        hist.final_objective = hist.objective[0]
        hist.converged = True
        hist.seconds = time.perf_counter() - t0
        return x, hist

    use_filter = config.filter_radius is not None
    if use_filter:
        coords, h = design_coordinates(problem)
        if coords is None:
            raise ValueError("filtering needs a mesh in problem.meta")
        H = filter_matrix(coords, config.filter_radius * h)
        beta = config.beta_init
    else:
        H, beta = None, None

    def physical(x):
        if H is None:
            return x, None
        xt = H @ x
        return heaviside(xt, beta), heaviside_derivative(xt, beta)

    sign = -1.0 if config.maximize else 1.0
    state = MMAState()
    scale = None
    for it in range(config.max_iter):
        xb, dproj = physical(x)
        f, g, _ = objective_and_gradient(problem, xb, config.eta)
        if H is not None:
            g = H.T @ (g * dproj)
        hist.objective.append(float(f))
        hist.beta.append(beta)
        if it % config.checkpoint_every == 0:
            hist.snapshots[it] = xb.copy()
        if callback is not None:
            callback(it, f, xb)
        if scale is None:
            scale = 1.0 / max(abs(f), 1e-300)
        x_new = mma_step(x, sign * scale * g, state, config)
        change = float(np.max(np.abs(x_new - x)))
        hist.change.append(change)
        x = x_new
        if H is not None and (it + 1) % config.beta_every == 0 and beta < config.beta_max:
            beta = min(2.0 * beta, config.beta_max)
            state = MMAState()
            continue
        beta_done = H is None or beta >= config.beta_max
        if change < config.tol and beta_done:
            hist.converged = True
            break

    xb, _ = physical(x)
    hist.snapshots[len(hist.objective)] = xb.copy()
    hist.final_objective = float(problem.value(xb, config.eta))
    hist.seconds = time.perf_counter() - t0
    return xb, hist
