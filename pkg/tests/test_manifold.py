import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levylab import manifold as mf


def test_volumes():
    assert mf.torus(3).volume == 1.0
    assert mf.sphere(2).volume == pytest.approx(4 * math.pi)
    assert mf.sphere(3).volume == pytest.approx(2 * math.pi**2)
    with pytest.raises(ValueError):
        mf.euclidean(2).volume


def test_rejects_low_dimension():
    with pytest.raises(ValueError):
        mf.sphere(1)


def test_exp_map_examples():
    S = mf.sphere(2)
    np.testing.assert_allclose(mf.exp_map(S, [0, 0, 1], [1, 0, 0], math.pi / 2), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(mf.exp_map(S, [0, 0, 1], [0, 1, 0], math.pi), [0, 0, -1], atol=1e-15)
    np.testing.assert_allclose(mf.exp_map(mf.torus(2), [0.9, 0.5], [1, 0], 0.2), [0.1, 0.5], atol=1e-15)
    np.testing.assert_allclose(mf.exp_map(mf.euclidean(2), [0.9, 0.5], [1, 0], 0.2), [1.1, 0.5])


def test_exp_map_rejects_non_tangent_and_negative_time():
    with pytest.raises(ValueError):
        mf.exp_map(mf.sphere(2), [0, 0, 1], [0, 0.6, 0.8], 1.0)
    with pytest.raises(ValueError):
        mf.exp_map(mf.torus(2), [0, 0], [1, 0], -1.0)


def test_distance_examples():
    assert mf.distance(mf.torus(2), [0.9, 0], [0.1, 0]) == pytest.approx(0.2)
    assert mf.distance(mf.sphere(2), [0, 0, 1], [0, 0, -1]) == pytest.approx(math.pi)
    p = np.array([0.0, 0.0, 1.0])
    q = mf.exp_map(mf.sphere(2), p, [1.0, 0.0, 0.0], 1.0)
    assert mf.distance(mf.sphere(2), p, q) == pytest.approx(1.0, abs=1e-12)


unit3 = st.lists(st.floats(-1, 1), min_size=3, max_size=3).map(np.array).filter(lambda v: np.linalg.norm(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(unit3, unit3, st.floats(0, math.pi))
def test_sphere_geodesic_property(p, z, t):
    S = mf.sphere(2)
    p = p / np.linalg.norm(p)
    v = mf.tangent_project(p, z)
    if np.linalg.norm(v) < 1e-3:
        return
    v = v / np.linalg.norm(v)
    q = mf.exp_map(S, p, v, t)
    assert abs(np.linalg.norm(q) - 1) < 1e-12
    assert mf.distance(S, p, q) == pytest.approx(t, abs=1e-9)
    assert mf.distance(S, q, p) == mf.distance(S, p, q)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_torus_distance_symmetric_and_bounded(p, q):
    T = mf.torus(2)
    d = mf.distance(T, p, q)
    assert d == pytest.approx(mf.distance(T, q, p))
    assert 0 <= d <= T.diameter + 1e-12


def test_uniform_point_moments():
    rng = np.random.default_rng(0)
    x = mf.uniform_point(mf.torus(2), rng, 10**6)
    assert abs(x[:, 0].mean() - 0.5) < 0.002
    y = mf.uniform_point(mf.sphere(2), rng, 10**6)
    assert abs(y[:, 2].mean()) < 0.002
    np.testing.assert_allclose(np.linalg.norm(y, axis=1), 1.0, atol=1e-12)


def test_uniform_point_deterministic_and_rejects_euclidean():
    a = mf.uniform_point(mf.sphere(2), np.random.default_rng(42), 5)
    b = mf.uniform_point(mf.sphere(2), np.random.default_rng(42), 5)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        mf.uniform_point(mf.euclidean(2), np.random.default_rng(0))


def test_uniform_direction_tangent_unit():
    rng = np.random.default_rng(1)
    S = mf.sphere(2)
    p = mf.uniform_point(S, rng, 1000)
    v = mf.uniform_direction(S, p, rng)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)
    assert np.max(np.abs(np.sum(p * v, axis=1))) < 1e-12
    w = mf.uniform_direction(mf.torus(2), np.zeros((1000, 2)), rng)
    np.testing.assert_allclose(np.linalg.norm(w, axis=1), 1.0, atol=1e-12)


def test_uniform_direction_is_isotropic():
    rng = np.random.default_rng(2)
    p = np.tile([0.0, 0.0, 1.0], (200000, 1))
    v = mf.uniform_direction(mf.sphere(2), p, rng)
    ang = np.arctan2(v[:, 1], v[:, 0])
    hist, _ = np.histogram(ang, bins=8, range=(-math.pi, math.pi))
    assert np.max(np.abs(hist / hist.mean() - 1)) < 0.03
