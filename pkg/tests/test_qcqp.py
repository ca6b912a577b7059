import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topobound.objectives import build_normalized_overlap, build_overlap_magnitude, evaluate
from topobound.plate import Plate, PlateConfig
from topobound.qcqp import S_BOX, S_CROSS, build_qcqp, build_qcqp_direct, hermitian_to_real, real_split


def _random_system(r, n):
    C = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n)) + 4 * np.eye(n)
    d = r.normal(size=n) + 1j * r.normal(size=n)
    b = r.normal(size=n) + 1j * r.normal(size=n)
    return C, d, b


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_real_split_reproduces_complex_product(n, seed):
    r = np.random.default_rng(seed)
    C, d, b = _random_system(r, n)
    theta = r.uniform(-1, 1, n)
    z = r.normal(size=n) + 1j * r.normal(size=n)
    Cp, Dp, bp = real_split(C, d, b)
    zr = np.concatenate([z.real, z.imag])
    lhs = (C + np.diag(theta * d)) @ z - b
    rhs = (Cp + np.diag(np.tile(theta, 2)) @ Dp) @ zr - bp
    assert np.allclose(np.concatenate([lhs.real, lhs.imag]), rhs, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_hermitian_to_real_quadratic_form(n, seed):
    r = np.random.default_rng(seed)
    H = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    P = H + H.conj().T
    p = r.normal(size=n) + 1j * r.normal(size=n)
    rr = float(r.normal())
    y = r.normal(size=n) + 1j * r.normal(size=n)
    alpha = float(r.normal())
    M = hermitian_to_real(P, p, rr)
    x = np.concatenate([y.real, y.imag, [alpha]])
    direct = np.real(np.vdot(y, P @ y)) + 2 * alpha * np.real(np.vdot(p, y)) + alpha**2 * rr
    assert np.isclose(x @ M @ x, direct, rtol=1e-10, atol=1e-10)
    assert np.allclose(M, M.T)


def test_magnitude_normalization_is_alpha_squared():
    obj = build_overlap_magnitude(np.array([1.0]), np.array([0]), 2)
    C, d, b = _random_system(np.random.default_rng(0), 2)
    q = build_qcqp_direct(C, d, b, obj)
    Q = np.zeros((5, 5))
    Q[-1, -1] = 1
    assert np.allclose(q.Q, Q)


def test_lift_recover_roundtrip_direct(rng):
    C, d, b = _random_system(rng, 4)
    c = np.array([0.6, 0.8])
    obj = build_normalized_overlap(c, np.array([1, 3]), 4)
    q = build_qcqp_direct(C, d, b, obj)
    theta = rng.uniform(-1, 1, 4)
    x = q.lift_theta(theta)
    box, cross, nrm = q.residuals(x)
    assert np.all(box <= 1e-12) and np.allclose(cross, 0, atol=1e-12) and abs(nrm) < 1e-12
    th, bad = q.recover_theta(x)
    assert not bad.any() and np.allclose(th, theta, atol=1e-10)
    z = np.linalg.solve(C + np.diag(theta * d), b)
    assert np.isclose(q.value(x), evaluate(obj, z), rtol=1e-10)


def test_direct_rejects_zero_coefficient():
    C, d, b = _random_system(np.random.default_rng(0), 3)
    d[1] = 0
    with pytest.raises(ValueError):
        build_qcqp_direct(C, d, b, build_overlap_magnitude(np.array([1.0]), np.array([0]), 3))


def test_constraint_matrices_match_residuals(rng):
    C, d, b = _random_system(rng, 3)
    q = build_qcqp_direct(C, d, b, build_overlap_magnitude(np.array([1.0]), np.array([0]), 3))
    x = rng.normal(size=q.size)
    box, cross, _ = q.residuals(x)
    for j in range(3):
        assert np.isclose(x @ q.A_matrix(j) @ x, box[j])
        assert np.isclose(x @ q.B_matrix(j) @ x, cross[j])
    assert np.allclose(S_BOX, S_BOX.T) and np.allclose(S_CROSS, S_CROSS.T)


def test_indeterminate_row_flagged(rng):
    C, d, b = _random_system(rng, 3)
    q = build_qcqp_direct(C, d, b, build_overlap_magnitude(np.array([1.0]), np.array([0]), 3))
    x = q.lift_theta(np.zeros(3))
    x[[1, 4]] = 0.0  # zero field on dof 1
    th, bad = q.recover_theta(x)
    assert bad[1] and th[1] == 0 and not bad[[0, 2]].any()


@pytest.mark.parametrize("objective", ["normalized_overlap", "overlap_magnitude"])
def test_condensed_instance_matches_full_model(small_mc, rng, objective):
    prob = small_mc.problem(objective)
    q = build_qcqp(prob)
    pos = {k: i for i, k in enumerate(prob.free)}
    for _ in range(3):
        theta = rng.uniform(-1, 1, prob.n_free)
        x = q.lift_theta(theta[[pos[k] for k in q.dofs]])
        assert np.isclose(q.value(x), prob.value(theta), rtol=1e-9)
        th, bad = q.recover_theta(x)
        assert np.allclose(th, theta[[pos[k] for k in q.dofs]], atol=1e-8)
        z_full = q.reconstruct(q.state(x))
        assert np.allclose(z_full, prob.solve(theta), atol=1e-9 * np.abs(z_full).max())


def test_plate_instance_drops_rotational_rows():
    prob = Plate(PlateConfig(nx=4, ny=4)).problem(10.0)
    q = build_qcqp(prob)
    assert q.n == 25 and np.all(q.dofs % 3 == 0)
