"""2D TM Helmholtz mode converter.

A straight high-index channel runs through the domain; a centred square
design region converts the input guided mode (left edge) into the output
mode (right edge). Top and bottom edges carry first-order absorbing
conditions, the left and right edges port conditions built from 1D
waveguide eigenmodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fem
from .numerics import gen_sym_eig
from .objectives import build_normalized_overlap, build_overlap_magnitude
from .problem import AffineSystem, DesignProblem


@dataclass(frozen=True)
class ModeConverterConfig:
    L: float = 4.0
    H: float = 2.0
    nx: int = 336
    ny: int = 168
    wavelength: float = 0.8
    eps_r: float = 10.0
    L_d: float = 0.5
    H_c: float = 1.0 / 6.0
    mode_in: int = 1
    mode_out: int = 2

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.L_d > self.H or self.L_d > self.L:
            raise ValueError("design region does not fit in the domain")
        if self.H_c > self.H:
            raise ValueError("channel taller than the domain")
        if self.mode_in < 1 or self.mode_out < 1:
            raise ValueError("mode orders start at 1")

    @property
    def k(self):
        return 2.0 * np.pi / self.wavelength


@dataclass
class WaveguideMode:
    beta: float
    profile: np.ndarray  # nodal values along the port, unit 2-norm
    order: int


class GuidedModeError(ValueError):
    pass


def waveguide_modes(y, k, eps, count):
    """Guided modes of the 1D slab problem  E'' + (k^2 eps - beta^2) E = 0.

    y: node coordinates along the port (first/last nodes are PEC walls).
    eps: nodal relative permittivity.
    Modes are sorted by decreasing beta^2; profiles have unit 2-norm over
    all port nodes (zero at the walls) and a positive largest lobe.
    """
    y = np.asarray(y, dtype=float)
    eps = np.asarray(eps, dtype=float)
    h = np.diff(y)
    n = y.size
    K = np.zeros((n, n))
    Ml = np.zeros(n)
    for e, he in enumerate(h):
        K[e:e + 2, e:e + 2] += np.array([[1.0, -1.0], [-1.0, 1.0]]) / he
        Ml[e:e + 2] += 0.5 * he
    inner = slice(1, n - 1)
    A = (k**2 * np.diag(eps * Ml) - K)[inner, inner]
    B = np.diag(Ml)[inner, inner]
    lam, psi = gen_sym_eig(A, B)
    guided = lam > k**2 * eps.min() * (1 + 1e-12)
    if guided.sum() < count:
        raise GuidedModeError(f"only {int(guided.sum())} guided modes, {count} requested")
    modes = []
    for j in range(count):
        prof = np.zeros(n)
        prof[inner] = psi[:, j]
        prof /= np.linalg.norm(prof)
        if prof[np.argmax(np.abs(prof))] < 0:
            prof = -prof
        modes.append(WaveguideMode(float(np.sqrt(lam[j])), prof, j + 1))
    return modes


def slab_eigenvalues(k, H, n_el, count):
    """beta^2 of the discrete uniform-eps (=1) slab with lumped mass."""
    h = H / n_el
    m = np.arange(1, count + 1)
    return k**2 - (4.0 / h**2) * np.sin(m * np.pi * h / (2.0 * H)) ** 2


class ModeConverter:
    """Assembled mode-converter model for a given configuration."""

    def __init__(self, cfg: ModeConverterConfig):
        self.cfg = cfg
        mesh = fem.build_structured_mesh(cfg.nx, cfg.ny, cfg.L, cfg.H)
        self.mesh = mesh
        n = mesh.n_nodes
        xy = mesh.coords
        tol = 1e-9 * max(cfg.L, cfg.H)

        # structured mesh: every element is the same rectangle
        ke, me = fem.quad_element_matrices(xy[mesh.elements[0]])
        Ke = np.broadcast_to(ke, (mesh.n_elements, 4, 4))
        Me = np.broadcast_to(me, (mesh.n_elements, 4, 4))
        self.K = fem.assemble(mesh, Ke)
        self.M0 = fem.assemble_diagonal(mesh, fem.hrz_lump(Me, np.full(mesh.n_elements, me.sum())))

        self.Mb = {t: fem.boundary_mass(mesh, t) for t in ("in", "out", "absorbing")}
        self.in_nodes = mesh.edge_nodes("in")
        self.out_nodes = mesh.edge_nodes("out")

        yc = 0.5 * cfg.H
        xc = 0.5 * cfg.L
        self.channel = np.abs(xy[:, 1] - yc) <= 0.5 * cfg.H_c + tol
        self.design = (np.abs(xy[:, 0] - xc) <= 0.5 * cfg.L_d + tol) & (
            np.abs(xy[:, 1] - yc) <= 0.5 * cfg.L_d + tol)
        self.free = np.flatnonzero(self.design)
        self.theta_fixed = np.where(self.channel, 1.0, -1.0)
        self.theta_fixed[self.free] = 0.0

        k = cfg.k
        n_modes = max(cfg.mode_in, cfg.mode_out)
        eps_port_in = self.eps_of(self.theta_fixed[self.in_nodes])
        eps_port_out = self.eps_of(self.theta_fixed[self.out_nodes])
        self.modes_in = waveguide_modes(xy[self.in_nodes, 1], k, eps_port_in, n_modes)
        self.modes_out = waveguide_modes(xy[self.out_nodes, 1], k, eps_port_out, n_modes)
        self.mode_in = self.modes_in[cfg.mode_in - 1]
        self.mode_out = self.modes_out[cfg.mode_out - 1]

        Dk = (k * self.Mb["absorbing"] + self.mode_in.beta * self.Mb["in"]
              + self.mode_out.beta * self.Mb["out"])
        self.Dk = Dk
        eps_mid = 0.5 * (cfg.eps_r + 1.0)
        self.C = sp.csr_matrix(self.K + 1j * Dk - k**2 * eps_mid * sp.diags(self.M0))
        self.d = -k**2 * 0.5 * (cfg.eps_r - 1.0) * self.M0 + 0j
        E_in = np.zeros(n)
        E_in[self.in_nodes] = self.mode_in.profile
        self.E_in_full = E_in
        self.b = 2j * self.mode_in.beta * (self.Mb["in"] @ E_in)

    def eps_of(self, theta):
        cfg = self.cfg
        return 0.5 * (np.asarray(theta) * (cfg.eps_r - 1.0) + (cfg.eps_r + 1.0))

    @property
    def n(self):
        return self.mesh.n_nodes

    def system(self):
        return AffineSystem(self.C, self.d.copy(), self.b.copy())

    def assemble_direct(self, theta_full, eta=0.0):
        """A(theta) assembled from nodal permittivity (independent of the split)."""
        k = self.cfg.k
        th = np.asarray(theta_full, dtype=float)
        eps = self.eps_of(th) - 1j * eta * (th + 1.0) * (1.0 - th)
        return sp.csr_matrix(self.K + 1j * self.Dk - k**2 * sp.diags(eps * self.M0))

    def target(self):
        """(S, c): output node indices and the normalized target mode profile."""
        c = self.mode_out.profile
        return self.out_nodes, c / np.linalg.norm(c)

    def problem(self, objective="overlap_magnitude"):
        S, c = self.target()
        if objective == "normalized_overlap":
            obj = build_normalized_overlap(c, S, self.n)
        elif objective == "overlap_magnitude":
            obj = build_overlap_magnitude(c, S, self.n)
        else:
            raise ValueError(f"unknown objective {objective!r}")
        return DesignProblem(
            self.system(), self.free.copy(), self.theta_fixed.copy(), obj,
            name=f"mode_converter/{objective}",
            pamp=self.cfg.k**2 * self.M0,
            meta={"mesh": self.mesh, "model": self, "n_per_node": 1},
        )

    def transmittance(self, z):
        """Power fraction carried by the output mode (unit incident amplitude).

        Modal power is taken as beta * a^H M_b a for amplitude a of a profile.
        """
        Mout = self.Mb["out"][self.out_nodes][:, self.out_nodes]
        Min = self.Mb["in"][self.in_nodes][:, self.in_nodes]
        e_out = self.mode_out.profile
        e_in = self.mode_in.profile
        norm_out = e_out @ (Mout @ e_out)
        a_out = (e_out @ (Mout @ np.asarray(z)[self.out_nodes])) / norm_out
        p_out = self.mode_out.beta * abs(a_out) ** 2 * norm_out
        p_in = self.mode_in.beta * (e_in @ (Min @ e_in))
        return float(p_out / p_in)


def build_system(cfg, theta_f):
    """AffineSystem of the mode converter after checking theta_f is in the box."""
    theta_f = np.asarray(theta_f, dtype=float)
    if np.any(np.abs(theta_f) > 1.0 + 1e-12):
        raise ValueError("design variables outside [-1, 1]")
    model = cfg if isinstance(cfg, ModeConverter) else ModeConverter(cfg)
    return model.system()


def transmittance(model, z):
    return model.transmittance(z)
