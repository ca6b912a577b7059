import numpy as np
import pytest

from topobound.objectives import (ZeroDenominatorError, build_normalized_overlap,
                                  build_overlap_magnitude, evaluate, state_gradient)


def _profile(rng, k):
    c = rng.normal(size=k)
    return c / np.linalg.norm(c)


def test_normalized_overlap_direct(rng):
    n, S = 10, np.array([2, 5, 7])
    c = _profile(rng, 3)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    obj = build_normalized_overlap(c, S, n)
    expected = abs(np.vdot(c, z[S])) ** 2 / np.linalg.norm(z[S]) ** 2
    assert np.isclose(evaluate(obj, z), expected, rtol=1e-12)
    # a field proportional to the target reaches the ceiling
    assert np.isclose(evaluate(obj, _embed(c, S, n) * (2 - 1j)), 1.0)


def _embed(c, S, n):
    z = np.zeros(n, complex)
    z[S] = c
    return z


def test_overlap_magnitude_direct(rng):
    n, S = 8, np.array([0, 3])
    c = _profile(rng, 2)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    obj = build_overlap_magnitude(c, S, n)
    assert np.isclose(evaluate(obj, z), abs(np.vdot(c, z[S])) ** 2)


def test_profile_must_be_unit(rng):
    with pytest.raises(ValueError):
        build_overlap_magnitude(np.array([1.0, 1.0]), np.array([0, 1]), 4)


def test_zero_denominator():
    obj = build_normalized_overlap(np.array([1.0]), np.array([0]), 3)
    with pytest.raises(ZeroDenominatorError):
        evaluate(obj, np.zeros(3, complex))


@pytest.mark.parametrize("builder", [build_normalized_overlap, build_overlap_magnitude])
def test_state_gradient_fd(builder, rng):
    n, S = 7, np.array([1, 2, 6])
    obj = builder(_profile(rng, 3), S, n)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    gr, gi = state_gradient(obj, z)
    h = 1e-6
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        fr = (evaluate(obj, z + e) - evaluate(obj, z - e)) / (2 * h)
        fi = (evaluate(obj, z + 1j * e) - evaluate(obj, z - 1j * e)) / (2 * h)
        assert np.isclose(gr[k], fr, rtol=1e-6, atol=1e-9)
        assert np.isclose(gi[k], fi, rtol=1e-6, atol=1e-9)


def test_compose_with_affine_map(rng):
    n, S = 6, np.array([1, 4])
    obj = build_normalized_overlap(_profile(rng, 2), S, n)
    G = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    g = rng.normal(size=2) + 1j * rng.normal(size=2)
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    z = np.zeros(n, complex)
    z[S] = g + G @ u
    comp = obj.compose(G, g, S)
    assert np.isclose(evaluate(comp, u), evaluate(obj, z), rtol=1e-12)
