"""Structured quad meshes, element matrices, HRZ lumping and static condensation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .numerics import SingularMatrixError

GAUSS2 = np.array([-1.0, 1.0]) / np.sqrt(3.0)


@dataclass(frozen=True)
class StructuredMesh:
    """Rectangle [0, L] x [0, H] split into nx x ny bilinear quads.

    Node (i, j) has index i + j*(nx+1); element (ex, ey) lists its nodes
    counter-clockwise starting from the lower-left corner.
    """

    nx: int
    ny: int
    L: float
    H: float
    coords: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)
    boundary: dict = field(repr=False)

    @property
    def n_nodes(self):
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self):
        return self.nx * self.ny

    @property
    def hx(self):
        return self.L / self.nx

    @property
    def hy(self):
        return self.H / self.ny

    def node(self, i, j):
        return i + j * (self.nx + 1)

    def edge_nodes(self, tag):
        """Sorted unique node indices on the edges carrying `tag`."""
        return np.unique(self.boundary[tag])


def build_structured_mesh(nx, ny, L, H):
    if int(nx) < 1 or int(ny) < 1:
        raise ValueError(f"element counts must be >= 1, got nx={nx}, ny={ny}")
    if not (L > 0 and H > 0):
        raise ValueError(f"dimensions must be positive, got L={L}, H={H}")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, L, nx + 1)
    ys = np.linspace(0.0, H, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # shape (ny+1, nx+1), row-major over y
    coords = np.column_stack([X.ravel(), Y.ravel()])

    ex, ey = np.meshgrid(np.arange(nx), np.arange(ny))
    n0 = (ex + ey * (nx + 1)).ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])

    bottom = np.arange(nx + 1)
    top = bottom + ny * (nx + 1)
    left = np.arange(ny + 1) * (nx + 1)
    right = left + nx

    def edges(nodes):
        return np.column_stack([nodes[:-1], nodes[1:]])

    boundary = {
        "in": edges(left),
        "out": edges(right),
        "absorbing": np.vstack([edges(bottom), edges(top)]),
    }
    boundary["all"] = np.vstack([boundary["in"], boundary["out"], boundary["absorbing"]])
    return StructuredMesh(nx, ny, float(L), float(H), coords, elements, boundary)


def quad_shape(xi, eta):
    N = 0.25 * np.array([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                         (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
    dN = 0.25 * np.array([[-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
                          [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)]])
    return N, dN


def quad_element_matrices(xe):
    """Laplace stiffness and consistent (unit density) mass of a bilinear quad.

    `xe` holds the 4x2 nodal coordinates. 2x2 Gauss quadrature.
    """
    Ke = np.zeros((4, 4))
    Me = np.zeros((4, 4))
    for xi in GAUSS2:
        for eta in GAUSS2:
            N, dN = quad_shape(xi, eta)
            J = dN @ xe
            detJ = np.linalg.det(J)
            if detJ <= 0:
                raise ValueError("element with non-positive Jacobian")
            B = np.linalg.solve(J, dN)
            Ke += B.T @ B * detJ
            Me += np.outer(N, N) * detJ
    return Ke, Me


def line_mass(h):
    """Consistent mass of a 2-node line element of length h."""
    return h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])


def boundary_mass(mesh, tag, n_dof=None):
    """Assemble the consistent line mass over the edges carrying `tag`."""
    n_dof = mesh.n_nodes if n_dof is None else n_dof
    edges = mesh.boundary[tag]
    rows, cols, vals = [], [], []
    for a, b in edges:
        h = np.linalg.norm(mesh.coords[b] - mesh.coords[a])
        me = line_mass(h)
        idx = np.array([a, b])
        rows.append(np.repeat(idx, 2))
        cols.append(np.tile(idx, 2))
        vals.append(me.ravel())
    if not rows:
        return sp.csr_matrix((n_dof, n_dof))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n_dof, n_dof))


def assemble(mesh, element_matrices, dofs_per_node=1):
    """Scatter-add per-element matrices (n_el, k, k) into a sparse matrix."""
    el = mesh.elements
    if dofs_per_node > 1:
        el = (el[:, :, None] * dofs_per_node + np.arange(dofs_per_node)).reshape(len(el), -1)
    k = el.shape[1]
    rows = np.repeat(el, k, axis=1).ravel()
    cols = np.tile(el, (1, k)).ravel()
    n = mesh.n_nodes * dofs_per_node
    return sp.csr_matrix((np.asarray(element_matrices).ravel(), (rows, cols)), shape=(n, n))


def assemble_diagonal(mesh, element_diagonals, dofs_per_node=1):
    el = mesh.elements
    if dofs_per_node > 1:
        el = (el[:, :, None] * dofs_per_node + np.arange(dofs_per_node)).reshape(len(el), -1)
    n = mesh.n_nodes * dofs_per_node
    return np.bincount(el.ravel(), weights=np.asarray(element_diagonals).ravel(), minlength=n)


def hrz_lump(consistent, total_mass, rotational=None):
    """HRZ diagonal lumping of element mass matrices.

    consistent: (n_el, k, k) or (k, k) consistent matrices (any scaling).
    total_mass: element masses, scalar or (n_el,).
    rotational: boolean mask of length k marking rotational dofs; those
        entries are zeroed and excluded from the diagonal sum.

    Returns the lumped diagonals with shape (n_el, k) (or (k,)).
    """
    Me = np.asarray(consistent, dtype=float)
    single = Me.ndim == 2
    if single:
        Me = Me[None]
    k = Me.shape[1]
    rot = np.zeros(k, bool) if rotational is None else np.asarray(rotational, bool)
    if rot.shape != (k,):
        raise ValueError(f"rotational mask has length {rot.size}, element has {k} dofs")
    diag = np.einsum("eii->ei", Me).copy()
    diag[:, rot] = 0.0
    sums = diag.sum(axis=1)
    mass = np.broadcast_to(np.asarray(total_mass, dtype=float), sums.shape)
    scale = np.divide(mass, sums, out=np.zeros_like(sums), where=sums != 0)
    lumped = diag * scale[:, None]
    return lumped[0] if single else lumped


@dataclass(frozen=True)
class DofPartition:
    """Passive/constrained dofs `c` and free (designable) dofs `f`."""

    c: np.ndarray
    f: np.ndarray

    @classmethod
    def from_free(cls, free, n):
        free = np.asarray(free, dtype=int)
        mask = np.ones(n, bool)
        mask[free] = False
        return cls(np.flatnonzero(mask), np.sort(free))

    def __post_init__(self):
        if np.intersect1d(self.c, self.f).size:
            raise ValueError("passive and free dof sets overlap")

    @property
    def n(self):
        return self.c.size + self.f.size


def _factor(Acc):
    if sp.issparse(Acc):
        try:
            lu = spla.splu(sp.csc_matrix(Acc))
        except RuntimeError as exc:
            raise SingularMatrixError("passive block A_cc is singular") from exc
        piv = np.abs(lu.U.diagonal())
        if piv.size and piv.min() < 1e-14 * spla.norm(Acc):
            raise SingularMatrixError("passive block A_cc is singular")
        return lu.solve
    from scipy.linalg import lu_factor, lu_solve

    lu, p = lu_factor(Acc)
    piv = np.abs(np.diag(lu))
    if piv.size and piv.min() < 1e-14 * np.linalg.norm(Acc):
        raise SingularMatrixError("passive block A_cc is singular")
    return lambda rhs: lu_solve((lu, p), rhs)


def _blocks(A, part):
    c, f = part.c, part.f
    if sp.issparse(A):
        A = sp.csr_matrix(A)
        return A[c][:, c], A[c][:, f], A[f][:, c], A[f][:, f]
    A = np.asarray(A)
    return A[np.ix_(c, c)], A[np.ix_(c, f)], A[np.ix_(f, c)], A[np.ix_(f, f)]


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


class Condensation:
    """Schur-complement elimination of the passive dofs of A z = b.

    A_cc^-1 A_cf is needed only on the passive rows coupled to free dofs
    (plus any `keep_rows`, positions within part.c); it is computed in
    column chunks so that large passive sets never form it densely.
    """

    def __init__(self, A, part, keep_rows=None, chunk=256):
        self.part = part
        self.Acc, self.Acf, self.Afc, self.Aff = _blocks(A, part)
        nf = part.f.size
        if not part.c.size:
            self._solve_cc = None
            self.rows = np.zeros(0, int)
            self.X_rows = np.zeros((0, nf), complex)
            self.A_tilde = _dense(self.Aff).astype(complex)
            return
        self._solve_cc = _factor(self.Acc)
        Afc = sp.csr_matrix(self.Afc) if sp.issparse(self.Afc) else sp.csr_matrix(np.asarray(self.Afc))
        coupled = np.unique(Afc.indices)
        extra = np.zeros(0, int) if keep_rows is None else np.asarray(keep_rows, int)
        self.rows = np.union1d(coupled, extra)
        Acf = self.Acf
        X = np.zeros((self.rows.size, nf), complex)
        for k in range(0, nf, chunk):
            cols = _dense(Acf[:, k:k + chunk]).astype(complex)
            X[:, k:k + chunk] = np.asarray(self._solve_cc(cols)).reshape(-1, cols.shape[1])[self.rows]
        self.X_rows = X
        pos = np.searchsorted(self.rows, coupled)
        self.A_tilde = np.asarray(_dense(self.Aff) - Afc[:, coupled] @ X[pos])

    def rhs(self, b):
        b = np.asarray(b, dtype=complex)
        bf = b[self.part.f]
        if not self.part.c.size:
            return bf.copy()
        return bf - self.Afc @ self._solve_cc(b[self.part.c])

    def passive_rows(self, b, rows):
        """(g, G) with z_c[rows] = g + G z_f; rows are positions within part.c."""
        rows = np.asarray(rows, int)
        pos = np.searchsorted(self.rows, rows)
        if np.any(pos >= self.rows.size) or np.any(self.rows[np.minimum(pos, self.rows.size - 1)] != rows):
            raise KeyError("requested passive rows were not kept at construction")
        g = self._solve_cc(np.asarray(b, complex)[self.part.c])[rows]
        return g, -self.X_rows[pos]

    def expand(self, z_f, b):
        b = np.asarray(b, dtype=complex)
        z = np.zeros(self.part.n, dtype=complex)
        z[self.part.f] = z_f
        if self.part.c.size:
            z[self.part.c] = self._solve_cc(b[self.part.c] - self.Acf @ np.asarray(z_f, complex))
        return z


def condense_passive(A, b, part):
    """Return (A_tilde, b_tilde) with A_tilde z_f = b_tilde on the free dofs."""
    cond = Condensation(A, part)
    return cond.A_tilde, cond.rhs(b)


def expand_condensed_solution(z_f, A, b, part):
    """Back-substitute z_c = A_cc^-1 (b_c - A_cf z_f) and return the full z."""
    b = np.asarray(b, dtype=complex)
    z = np.zeros(part.n, dtype=complex)
    z[part.f] = z_f
    if part.c.size:
        Acc, Acf, _, _ = _blocks(A, part)
        solve = _factor(Acc)
        z[part.c] = solve(b[part.c] - Acf @ np.asarray(z_f))
    return z
