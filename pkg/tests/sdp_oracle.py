"""Reference SDP solutions from Clarabel (independent conic solver)."""
import numpy as np
import scipy.sparse as sp


def _svec(A):
    # Clarabel's triangle: upper triangle, column-major, off-diagonals scaled by sqrt(2)
    r, c = np.triu_indices(A.shape[0])
    order = np.lexsort((r, c))
    r, c = r[order], c[order]
    return A[r, c] * np.where(r == c, 1.0, np.sqrt(2.0))


def clarabel_bound(prob):
    """Optimal value of max <P, X> for an SdpProblem, or None without clarabel."""
    try:
        import clarabel
    except ImportError:
        return None
    N = prob.side
    nv = N * (N + 1) // 2
    eq, ineq = [], []
    for A, sense, b, _ in prob.constraints():
        (eq if sense == "=" else ineq).append((_svec(A), b))
    blocks = [sp.csc_matrix(np.array([a for a, _ in eq]))]
    rhs = [np.array([b for _, b in eq])]
    cones = [clarabel.ZeroConeT(len(eq))]
    if ineq:
        blocks.append(sp.csc_matrix(np.array([a for a, _ in ineq])))
        rhs.append(np.array([b for _, b in ineq]))
        cones.append(clarabel.NonnegativeConeT(len(ineq)))
    blocks.append(-sp.identity(nv, format="csc"))
    rhs.append(np.zeros(nv))
    cones.append(clarabel.PSDTriangleConeT(N))
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = settings.tol_gap_rel = 1e-10
    solver = clarabel.DefaultSolver(sp.csc_matrix((nv, nv)), -_svec(prob.P),
                                    sp.vstack(blocks).tocsc(), np.concatenate(rhs), cones, settings)
    res = solver.solve()
    return -res.obj_val, str(res.status)
