import numpy as np
import pytest

from topobound.plate import (Plate, PlateConfig, PlateConfigError, QFactorError, acm_element,
                             build_plate_system, frequency_response, q_factor)

A_EL, B_EL, D, NU, T = 0.3, 0.2, 2.0, 0.3, 0.01
NODES = np.array([[0, 0], [A_EL, 0], [A_EL, B_EL], [0, B_EL]])


def _nodal(w, wx, wy):
    return np.concatenate([[w(x, y), wx(x, y), wy(x, y)] for x, y in NODES])


def test_acm_rigid_body_modes():
    K, _ = acm_element(A_EL, B_EL, D, NU, T)
    ev = np.linalg.eigvalsh(K)
    assert np.sum(np.abs(ev) < 1e-9 * ev.max()) == 3
    for u in (_nodal(lambda x, y: 1, lambda x, y: 0, lambda x, y: 0),
              _nodal(lambda x, y: x, lambda x, y: 1, lambda x, y: 0),
              _nodal(lambda x, y: y, lambda x, y: 0, lambda x, y: 1)):
        assert np.allclose(K @ u, 0, atol=1e-9 * ev.max())


def test_acm_constant_curvature_energy():
    K, _ = acm_element(A_EL, B_EL, D, NU, T)
    area = A_EL * B_EL
    bend = _nodal(lambda x, y: 0.5 * x * x, lambda x, y: x, lambda x, y: 0)
    assert np.isclose(bend @ K @ bend, D * area, rtol=1e-12)
    twist = _nodal(lambda x, y: x * y, lambda x, y: y, lambda x, y: x)
    assert np.isclose(twist @ K @ twist, 2 * D * (1 - NU) * area, rtol=1e-12)


def test_acm_translational_mass():
    _, M = acm_element(A_EL, B_EL, D, NU, T)
    u = _nodal(lambda x, y: 1, lambda x, y: 0, lambda x, y: 0)
    assert np.isclose(u @ M @ u, T * A_EL * B_EL, rtol=1e-12)


@pytest.fixture(scope="module")
def plate():
    return Plate(PlateConfig(nx=6, ny=6))


def test_lumped_mass_totals(plate):
    cfg = plate.cfg
    assert np.isclose(plate.M0.sum(), cfg.t * cfg.L**2)
    rot = np.ones(plate.n_dof, bool)
    rot[plate.w_dofs] = False
    assert np.all(plate.M0[rot] == 0)
    assert np.isclose(plate.Mline.sum(), 4 * cfg.L)


def test_plate_split_matches_direct(plate, rng):
    theta = np.zeros(plate.n_dof)
    theta[plate.w_dofs] = rng.uniform(-1, 1, plate.w_dofs.size)
    prob = plate.problem(7.0)
    A = prob.matrix(theta[prob.free]).toarray()
    B = plate.assemble_direct(theta, 7.0).toarray()
    assert np.allclose(A, B, atol=1e-12 * np.abs(B).max())


def test_rotational_design_rejected(plate):
    theta = np.zeros(plate.n_dof)
    theta[1] = 0.5
    with pytest.raises(ValueError):
        build_plate_system(plate, theta)


def test_odd_mesh_has_no_centre():
    with pytest.raises(PlateConfigError):
        Plate(PlateConfig(nx=5, ny=5))


def test_bad_density_range():
    with pytest.raises(ValueError):
        PlateConfig(rho_min=100, rho_max=10)


def test_q_factor_of_lorentzian():
    w0, width = 10.0, 0.5
    om = np.linspace(5, 15, 20001)
    v = 1.0 / (1.0 + ((om - w0) / (width / 2)) ** 2)
    assert np.isclose(q_factor(om, v), w0 / width, rtol=1e-4)


def test_q_factor_errors():
    om = np.linspace(0, 1, 11)
    with pytest.raises(QFactorError):
        q_factor(om, om)  # peak at the edge
    with pytest.raises(QFactorError):
        q_factor(om, 2.0 - (om - 0.5) ** 2)  # never drops to half power


def test_frequency_response_shape(plate):
    vals, flags = frequency_response(plate, np.zeros(plate.mesh.n_nodes), [1.0, 2.0, 3.0])
    assert vals.shape == (3,) and not flags.any() and np.all(vals > 0)
