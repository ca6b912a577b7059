import numpy as np
import pytest

from topobound import sdp
from topobound.objectives import build_normalized_overlap, build_overlap_magnitude
from topobound.qcqp import build_qcqp, build_qcqp_direct

from sdp_oracle import clarabel_bound


def lp_problem(c, a, sense="="):
    """max c.x s.t. a.x (sense) 1, x >= 0 as a diagonal SDP."""
    return sdp.SdpProblem(np.diag(c), [sdp.DenseConstraint(np.diag(a), sense, 1.0, "budget")])


@pytest.mark.parametrize("sense", ["=", "<="])
def test_lp_closed_form(rng, sense):
    c = rng.uniform(0.5, 3.0, 6)
    a = rng.uniform(0.5, 2.0, 6)
    prob = lp_problem(c, a, sense)
    sol = sdp.solve_sdp(prob, tol=1e-9)
    assert sol.status == "optimal"
    assert abs(sol.bound - np.max(c / a)) <= 1e-8 * np.max(c / a)
    assert sdp.verify_certificate(prob, sol).passed


def test_overlap_at_ceiling_gives_one():
    # P = Q: every feasible X has <P, X> = <Q, X> = 1
    Q = np.diag([1.0, 2.0, 0.5])
    prob = sdp.SdpProblem(Q.copy(), [sdp.DenseConstraint(Q, "=", 1.0)])
    sol = sdp.solve_sdp(prob, tol=1e-9)
    assert abs(sol.bound - 1.0) < 1e-8


def _toy(rng, n=1, magnitude=True):
    C = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) + 3 * np.eye(n)
    d = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    builder = build_overlap_magnitude if magnitude else build_normalized_overlap
    obj = builder(np.array([1.0]), np.array([0]), n)
    return build_qcqp_direct(C, d, b, obj)


def test_toy_sizes(rng):
    prob = sdp.assemble_relaxation(_toy(rng, 1))
    assert prob.side == 3 and prob.n_constraints == 3
    q = _toy(rng, 4)
    assert sdp.assemble_relaxation(q).n_constraints == 2 * 4 + 1
    assert sdp.assemble_relaxation(q, cross_correlation=False).n_constraints == 4 + 1


def test_size_guard():
    prob = sdp.SdpProblem(np.zeros((sdp.MAX_SIDE + 1, 1)))
    with pytest.raises(sdp.SdpTooLargeError):
        sdp.solve_sdp(prob)


def test_operator_adjointness(small_mc, rng):
    prob = sdp.assemble_relaxation(build_qcqp(small_mc.problem("overlap_magnitude")))
    op = sdp._Operator(prob)
    B = rng.normal(size=(prob.side, prob.side))
    X = B + B.T
    y = rng.normal(size=op.m)
    assert np.isclose(op.apply(X) @ y, np.vdot(X, op.adjoint(y)), rtol=1e-10)
    dense = np.array([np.vdot(A, X) for A, *_ in prob.constraints()])
    assert np.allclose(op.apply(X), dense, atol=1e-9 * np.abs(dense).max())


@pytest.mark.parametrize("objective", ["normalized_overlap", "overlap_magnitude"])
def test_against_independent_solver(tiny_mc, objective):
    prob = sdp.assemble_relaxation(build_qcqp(tiny_mc.problem(objective)))
    ref = clarabel_bound(prob)
    if ref is None:
        pytest.skip("clarabel not installed")
    sol = sdp.solve_sdp(prob)
    assert "Solved" in ref[1]
    assert abs(sol.bound - ref[0]) <= 1e-5 * max(1.0, abs(ref[0]))


def test_random_toys_against_independent_solver(rng):
    for n in (1, 2, 3):
        for magnitude in (True, False):
            prob = sdp.assemble_relaxation(_toy(rng, n, magnitude))
            ref = clarabel_bound(prob)
            if ref is None:
                pytest.skip("clarabel not installed")
            sol = sdp.solve_sdp(prob)
            assert abs(sol.bound - ref[0]) <= 1e-5 * max(1.0, abs(ref[0])), (n, magnitude)


def test_certificate_detects_corruption(rng):
    c = rng.uniform(0.5, 3.0, 4)
    prob = lp_problem(c, np.ones(4))
    sol = sdp.solve_sdp(prob)
    bad_X = sdp.SdpSolution(sol.X - 0.5 * np.eye(4) * np.trace(sol.X), sol.y, sol.Z, "optimal", 0,
                            sol.primal_objective, sol.dual_objective)
    rep = sdp.verify_certificate(prob, bad_X)
    assert not rep.passed and any("PSD" in m for m in rep.messages)
    bad_y = sdp.SdpSolution(sol.X, sol.y * 1.1, sol.Z, "optimal", 0, sol.primal_objective,
                            sol.dual_objective)
    rep = sdp.verify_certificate(prob, bad_y)
    assert not rep.passed


def test_export_roundtrip(tmp_path, rng):
    q = _toy(rng, 2, magnitude=False)
    prob = sdp.assemble_relaxation(q)
    path = tmp_path / "toy.sdp"
    sdp.export_sdp(prob, path)
    back = sdp.read_sdp(path)
    assert back.side == prob.side and back.n_constraints == prob.n_constraints
    assert np.array_equal(back.P, prob.P)
    for (A, s, r, _), (B, t, u, _) in zip(prob.constraints(), back.constraints()):
        assert np.array_equal(np.triu(A), np.triu(B)) and s == t and r == u
    assert abs(sdp.solve_sdp(back).bound - sdp.solve_sdp(prob).bound) < 1e-7


def test_read_rejects_malformed(tmp_path):
    p = tmp_path / "bad.sdp"
    p.write_text("# side 2\n# constraints 1\n# constraint 1 >= 1.0 x\n")
    with pytest.raises(sdp.SdpFormatError):
        sdp.read_sdp(p)
    p.write_text("# side 2\n0 1 1 1.0\n")
    with pytest.raises(sdp.SdpFormatError):
        sdp.read_sdp(p)


def test_gap_history_decreases_overall(small_mc):
    prob = sdp.assemble_relaxation(build_qcqp(small_mc.problem("overlap_magnitude")))
    sol = sdp.solve_sdp(prob)
    h = np.array(sol.gap_history)
    assert sol.status == "optimal"
    assert h[-1] < 1e-3 * h[0]
