"""Harmonically forced Kirchhoff plate on spring-dashpot edge supports.

Non-conforming 12-dof rectangular (ACM) elements, nodal dofs
(w, dw/dx, dw/dy). The design scales HRZ-lumped point masses on the
out-of-plane dofs only.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import fem
from .objectives import build_overlap_magnitude
from .problem import AffineSystem, DesignProblem, solve_state

DOFS_PER_NODE = 3
ROTATIONAL = np.tile([False, True, True], 4)


@dataclass(frozen=True)
class PlateConfig:
    L: float = 0.5
    t: float = 0.01
    E: float = 1.0  # kPa
    nu: float = 0.4
    rho_min: float = 10.0
    rho_max: float = 100.0
    spring_s: float = 1e-2
    gamma: float = 50.0
    omega: float = 10.0
    nx: int = 30
    ny: int = 30

    def __post_init__(self):
        if not self.rho_max > self.rho_min > 0:
            raise ValueError("need rho_max > rho_min > 0")
        if self.gamma < 0:
            raise ValueError("damping parameter must be non-negative")

    @property
    def flexural_rigidity(self):
        return self.E * 1e3 * self.t**3 / (12.0 * (1.0 - self.nu**2))


class PlateConfigError(ValueError):
    pass


def _basis(xi, eta):
    """12-term ACM polynomial basis and its derivatives in unit coordinates."""
    x, y = xi, eta
    p = np.array([1, x, y, x * x, x * y, y * y, x**3, x * x * y, x * y * y, y**3,
                  x**3 * y, x * y**3])
    px = np.array([0, 1, 0, 2 * x, y, 0, 3 * x * x, 2 * x * y, y * y, 0, 3 * x * x * y, y**3])
    py = np.array([0, 0, 1, 0, x, 2 * y, 0, x * x, 2 * x * y, 3 * y * y, x**3, 3 * x * y * y])
    pxx = np.array([0, 0, 0, 2, 0, 0, 6 * x, 2 * y, 0, 0, 6 * x * y, 0])
    pyy = np.array([0, 0, 0, 0, 0, 2, 0, 0, 2 * x, 6 * y, 0, 6 * x * y])
    pxy = np.array([0, 0, 0, 0, 1, 0, 0, 2 * x, 2 * y, 0, 3 * x * x, 3 * y * y])
    return p, px, py, pxx, pyy, pxy


@lru_cache(maxsize=32)
def acm_element(a, b, rigidity, nu, t):
    """Stiffness and consistent mass (unit density) of an a x b ACM element.

    Node order (0,0), (a,0), (a,b), (0,b); dofs per node (w, w_x, w_y).
    """
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    Cm = np.zeros((12, 12))
    for i, (x, y) in enumerate(corners):
        p, px, py, *_ = _basis(x, y)
        Cm[3 * i] = p
        Cm[3 * i + 1] = px / a
        Cm[3 * i + 2] = py / b
    Cinv = np.linalg.inv(Cm)

    Dm = rigidity * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])
    Ke = np.zeros((12, 12))
    Me = np.zeros((12, 12))
    g3, w3 = np.polynomial.legendre.leggauss(3)
    g4, w4 = np.polynomial.legendre.leggauss(4)
    for gx, wx in zip(0.5 * (g3 + 1), 0.5 * w3):
        for gy, wy in zip(0.5 * (g3 + 1), 0.5 * w3):
            _, _, _, pxx, pyy, pxy = _basis(gx, gy)
            B = np.vstack([pxx / a**2, pyy / b**2, 2.0 * pxy / (a * b)]) @ Cinv
            Ke += B.T @ Dm @ B * wx * wy * a * b
    for gx, wx in zip(0.5 * (g4 + 1), 0.5 * w4):
        for gy, wy in zip(0.5 * (g4 + 1), 0.5 * w4):
            N = _basis(gx, gy)[0] @ Cinv
            Me += t * np.outer(N, N) * wx * wy * a * b
    return 0.5 * (Ke + Ke.T), 0.5 * (Me + Me.T)


class Plate:
    """Assembled plate model (design-independent parts)."""

    def __init__(self, cfg: PlateConfig):
        self.cfg = cfg
        mesh = fem.build_structured_mesh(cfg.nx, cfg.ny, cfg.L, cfg.L)
        self.mesh = mesh
        n = mesh.n_nodes * DOFS_PER_NODE
        self.n_dof = n
        a, b = mesh.hx, mesh.hy
        ke, me = acm_element(a, b, cfg.flexural_rigidity, cfg.nu, cfg.t)
        self.ke, self.me = ke, me
        ne = mesh.n_elements
        self.K = fem.assemble(mesh, np.broadcast_to(ke, (ne, 12, 12)), DOFS_PER_NODE)
        lumped = fem.hrz_lump(me, cfg.t * a * b, ROTATIONAL)
        self.M0 = fem.assemble_diagonal(mesh, np.broadcast_to(lumped, (ne, 12)), DOFS_PER_NODE)

        w_dofs = np.arange(mesh.n_nodes) * DOFS_PER_NODE
        self.w_dofs = w_dofs
        Mline = fem.boundary_mass(mesh, "all")  # node-based, w only
        P = sp.csr_matrix((np.ones(mesh.n_nodes), (w_dofs, np.arange(mesh.n_nodes))),
                          shape=(n, mesh.n_nodes))
        self.Mline = sp.csr_matrix(P @ Mline @ P.T)

        if cfg.nx % 2 or cfg.ny % 2:
            raise PlateConfigError("the mesh has no centre node (nx and ny must be even)")
        self.center_node = mesh.node(cfg.nx // 2, cfg.ny // 2)
        self.center_dof = DOFS_PER_NODE * self.center_node
        self.b = np.zeros(n, dtype=complex)
        self.b[self.center_dof] = 1.0

    def matrices(self, omega=None):
        """(C, d) of the affine split at excitation frequency omega."""
        cfg = self.cfg
        omega = cfg.omega if omega is None else omega
        s = cfg.spring_s
        rho_mid = 0.5 * (cfg.rho_max + cfg.rho_min)
        rho_half = 0.5 * (cfg.rho_max - cfg.rho_min)
        C = (self.K + s * self.Mline + 1j * (s * cfg.gamma) * self.Mline
             - omega**2 * rho_mid * sp.diags(self.M0))
        d = -omega**2 * rho_half * self.M0 + 0j
        return sp.csr_matrix(C), d

    def assemble_direct(self, theta, omega=None):
        """A(theta) from nodal densities, independent of the affine split."""
        cfg = self.cfg
        omega = cfg.omega if omega is None else omega
        rho = 0.5 * (np.asarray(theta) * (cfg.rho_max - cfg.rho_min) + (cfg.rho_max + cfg.rho_min))
        s = cfg.spring_s
        return sp.csr_matrix(self.K + s * (1 + 1j * cfg.gamma) * self.Mline
                             - omega**2 * sp.diags(rho * self.M0))

    def system(self, omega=None):
        C, d = self.matrices(omega)
        return AffineSystem(C, d, self.b.copy())

    def problem(self, omega=None):
        n = self.n_dof
        obj = build_overlap_magnitude(np.array([1.0]), np.array([self.center_dof]), n)
        theta_fixed = np.zeros(n)
        return DesignProblem(
            self.system(omega), self.w_dofs.copy(), theta_fixed, obj,
            name="plate/overlap_magnitude",
            meta={"mesh": self.mesh, "model": self, "n_per_node": DOFS_PER_NODE},
        )


def build_plate_system(cfg, theta=None):
    """AffineSystem (C, d, b) of the plate at cfg.omega.

    theta, when given, must vanish on the rotational dofs.
    """
    model = cfg if isinstance(cfg, Plate) else Plate(cfg)
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        rot = np.ones(model.n_dof, bool)
        rot[model.w_dofs] = False
        if np.any(theta[rot] != 0.0):
            raise ValueError("theta must be prescribed to zero on rotational dofs")
        if np.any(np.abs(theta) > 1.0 + 1e-12):
            raise ValueError("design variables outside [-1, 1]")
    return model.system()


def response_curve(assemble, b, omegas, dofs):
    """mean |z[dofs]|^2 for A(omega) z = b over a frequency grid.

    Returns (values, singular) where singular flags failed solves (NaN value).
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if omegas.size == 0:
        raise ValueError("empty frequency grid")
    vals = np.empty(omegas.size)
    flags = np.zeros(omegas.size, bool)
    for i, om in enumerate(omegas):
        try:
            z = solve_state(assemble(om), b)
        except np.linalg.LinAlgError:
            vals[i] = np.nan
            flags[i] = True
            continue
        vals[i] = np.mean(np.abs(z[dofs]) ** 2)
    return vals, flags


def frequency_response(cfg, theta, omegas, load_scale=1.0):
    model = cfg if isinstance(cfg, Plate) else Plate(cfg)
    th = np.asarray(theta, dtype=float)
    if th.size == model.mesh.n_nodes:
        full = np.zeros(model.n_dof)
        full[model.w_dofs] = th
        th = full
    return response_curve(lambda om: sp.csc_matrix(model.assemble_direct(th, om)),
                          load_scale * model.b, omegas, model.w_dofs)


class QFactorError(ValueError):
    pass


def q_factor(omegas, values):
    """Half-power quality factor omega_peak / bandwidth of a response curve.

    `values` are power-like (|w|^2); half power is half the peak value.
    Crossings are located by linear interpolation.
    """
    om = np.asarray(omegas, dtype=float)
    v = np.asarray(values, dtype=float)
    k = int(np.nanargmax(v))
    if k == 0 or k == v.size - 1 or not (v[k] > v[0] and v[k] > v[-1]):
        raise QFactorError("response curve has no interior maximum")
    half = 0.5 * v[k]
    left = np.flatnonzero(v[:k] <= half)
    right = np.flatnonzero(v[k:] <= half)
    if left.size == 0 or right.size == 0:
        raise QFactorError("half-power points lie outside the frequency grid")
    i = left[-1]
    j = k + right[0]
    w1 = om[i] + (half - v[i]) * (om[i + 1] - om[i]) / (v[i + 1] - v[i])
    w2 = om[j - 1] + (half - v[j - 1]) * (om[j] - om[j - 1]) / (v[j] - v[j - 1])
    return om[k] / (w2 - w1)
