import numpy as np
import pytest

from topobound import recovery as rc
from topobound import sdp
from topobound.objectives import build_overlap_magnitude
from topobound.qcqp import build_qcqp, build_qcqp_direct


@pytest.fixture(scope="module")
def mc_instance(request):
    small_mc = request.getfixturevalue("small_mc")
    prob = small_mc.problem("overlap_magnitude")
    q = build_qcqp(prob)
    sol = sdp.solve_sdp(sdp.assemble_relaxation(q))
    return prob, q, sol


def _reduced(prob, q, theta):
    pos = {k: i for i, k in enumerate(prob.free)}
    return theta[[pos[k] for k in q.dofs]]


def test_rank_one_lifted_point_is_recovered_exactly(small_mc, rng):
    prob = small_mc.problem("overlap_magnitude")
    q = build_qcqp(prob)
    theta = rng.uniform(-1, 1, prob.n_free)
    x = q.lift_theta(_reduced(prob, q, theta))
    for sign in (1, -1):
        a = rc.rank_r_recover(np.outer(sign * x, sign * x), 1, q)
        assert np.allclose(a.theta_a, _reduced(prob, q, theta), atol=1e-8)
        assert np.allclose(a.theta_a, a.theta_b, atol=1e-8)
        assert np.isclose(rc.evaluate_recovered(a, prob), prob.value(theta), rtol=1e-8)
        assert a.x[-1] > 0


def test_rank_above_numerical_rank_rejected(rng):
    x = rng.normal(size=5)
    C = np.eye(2) * (2 + 1j)
    q = build_qcqp_direct(C, np.ones(2), np.ones(2), build_overlap_magnitude(np.array([1.0]), np.array([0]), 2))
    with pytest.raises(rc.RankError):
        rc.rank_r_recover(np.outer(x, x), 2, q)
    with pytest.raises(rc.RankError):
        rc.rank_r_recover(np.outer(x, x), 0, q)


def test_halves_differ_for_multi_rank(rng):
    C = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) + 3 * np.eye(3)
    d = rng.normal(size=3) + 1j * rng.normal(size=3)
    q = build_qcqp_direct(C, d, rng.normal(size=3) + 0j,
                          build_overlap_magnitude(np.array([1.0]), np.array([0]), 3))
    B = rng.normal(size=(7, 7))
    a = rc.rank_r_recover(B @ B.T, 3, q)
    assert not np.allclose(a.theta_a, a.theta_b)


def test_project_box(rng):
    th = np.array([-2.0, -0.3, 0.0, 1.7])
    assert np.array_equal(rc.project_box(th), [-1.0, -0.3, 0.0, 1.0])
    v = rng.normal(size=50) * 2
    p = rc.project_box(v)
    assert np.array_equal(rc.project_box(p), p)
    # componentwise nearest point of the box
    assert np.allclose(np.abs(v - p), np.maximum(np.abs(v) - 1, 0))


def test_numerical_rank():
    assert rc.numerical_rank([1.0, 1e-3, 1e-7, 0]) == 2
    assert rc.numerical_rank([0.0, 0.0]) == 0


def test_recovered_designs_respect_the_bound(mc_instance):
    prob, q, sol = mc_instance
    for r in (1, 2, 3, 4):
        a = rc.rank_r_recover(sol.X, r, q)
        for half in ("a", "b"):
            assert rc.evaluate_recovered(a, prob, half) <= sol.bound * (1 + 1e-6)


def test_rank_one_design_is_symmetric_and_useless(mc_instance):
    # the rank-1 field approximation carries no antisymmetric output
    prob, q, sol = mc_instance
    a = rc.rank_r_recover(sol.X, 1, q)
    assert rc.evaluate_recovered(a, prob) < 1e-6 * sol.bound


def test_seed_layout(mc_instance):
    prob, q, sol = mc_instance
    a = rc.rank_r_recover(sol.X, 2, q)
    seed = rc.seed_topopt(a, prob, "b")
    assert seed.shape == (prob.n_free,) and np.all(np.abs(seed) <= 1)
