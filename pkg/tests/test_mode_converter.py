import numpy as np
import pytest

from topobound.mode_converter import (GuidedModeError, ModeConverterConfig, build_system,
                                      slab_eigenvalues, waveguide_modes)


def test_uniform_slab_matches_closed_form():
    # interior permittivity 4 equals vacuum at wavenumber 2k; the wall
    # values do not enter the interior operator
    k, H, n_el = 2 * np.pi / 0.8, 2.0, 40
    y = np.linspace(0, H, n_el + 1)
    eps = np.full(n_el + 1, 4.0)
    eps[0] = eps[-1] = 1.0
    modes = waveguide_modes(y, k, eps, 3)
    ref = slab_eigenvalues(2 * k, H, n_el, 3)
    assert np.allclose([m.beta**2 for m in modes], ref, rtol=1e-10)


def test_mode_profiles_normalized_and_signed():
    y = np.linspace(0, 2.0, 29)
    eps = np.where(np.abs(y - 1.0) <= 1 / 12 + 1e-9, 10.0, 1.0)
    modes = waveguide_modes(y, 2 * np.pi / 0.8, eps, 2)
    for m in modes:
        assert np.isclose(np.linalg.norm(m.profile), 1.0)
        assert m.profile[np.argmax(np.abs(m.profile))] > 0
        assert m.profile[0] == 0 and m.profile[-1] == 0
    # fundamental symmetric, second antisymmetric about the channel axis
    assert np.allclose(modes[0].profile, modes[0].profile[::-1], atol=1e-10)
    assert np.allclose(modes[1].profile, -modes[1].profile[::-1], atol=1e-10)


def test_too_many_modes_requested():
    y = np.linspace(0, 2.0, 29)
    eps = np.where(np.abs(y - 1.0) <= 1 / 12 + 1e-9, 10.0, 1.0)
    with pytest.raises(GuidedModeError):
        waveguide_modes(y, 2 * np.pi / 0.8, eps, 20)


def test_split_matches_direct_assembly(small_mc, rng):
    prob = small_mc.problem("overlap_magnitude")
    theta_f = rng.uniform(-1, 1, prob.n_free)
    A_split = prob.matrix(theta_f).toarray()
    A_direct = small_mc.assemble_direct(prob.full_theta(theta_f)).toarray()
    assert np.allclose(A_split, A_direct, rtol=0, atol=1e-10 * np.abs(A_direct).max())


def test_pamping_matches_direct(small_mc, rng):
    prob = small_mc.problem("overlap_magnitude")
    theta_f = rng.uniform(-1, 1, prob.n_free)
    A = prob.matrix(theta_f, eta=0.7).toarray()
    B = small_mc.assemble_direct(prob.full_theta(theta_f), eta=0.7).toarray()
    assert np.allclose(A, B, atol=1e-10 * np.abs(B).max())


def test_design_region_size(small_mc):
    assert small_mc.free.size == 25


def test_transmittance_of_straight_channel(small_mc):
    # the straight channel is left-right symmetric, so no power goes to the
    # antisymmetric output mode
    prob = small_mc.problem("overlap_magnitude")
    z = prob.solve(np.where(small_mc.channel[prob.free], 1.0, -1.0))
    assert small_mc.transmittance(z) < 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        ModeConverterConfig(L_d=3.0)
    with pytest.raises(ValueError):
        ModeConverterConfig(wavelength=-1)
    with pytest.raises(ValueError):
        build_system(ModeConverterConfig(nx=8, ny=4), np.array([1.5]))
