import numpy as np
import pytest

from steinerchase.geometry import (Ball, HalfSpace, ZeroNormalError,
                                   membership_tol, normalize_halfspace,
                                   project_halfspace, reflect,
                                   sample_unit_sphere, sample_unit_sphere_batch,
                                   worker_stream)


def test_halfspace_requires_unit_normal():
    with pytest.raises(ValueError):
        HalfSpace(np.array([2.0, 0.0]), 1.0)
    h = HalfSpace(np.array([0.0, 1.0]), -0.5)
    assert h.dimension == 2
    assert h.offset == -0.5


def test_halfspace_rejects_nonfinite():
    with pytest.raises(ValueError):
        HalfSpace(np.array([1.0]), np.inf)
    with pytest.raises(ValueError):
        HalfSpace(np.array([np.nan]), 0.0)


def test_normalize_halfspace_rescales_offset():
    h = normalize_halfspace(np.array([0.0, 3.0]), 6.0)
    assert np.allclose(h.normal, [0.0, 1.0])
    assert h.offset == pytest.approx(2.0)


def test_normalize_halfspace_zero_normal():
    with pytest.raises(ZeroNormalError):
        normalize_halfspace(np.zeros(3), 1.0)
    with pytest.raises(ZeroNormalError):
        normalize_halfspace(np.array([1e-15, 0.0]), 1.0)


def test_signed_gap_and_contains():
    h = HalfSpace(np.array([1.0, 0.0]), 1.0)
    assert h.signed_gap(np.array([3.0, 5.0])) == pytest.approx(2.0)
    assert h.signed_gap(np.array([0.0, 0.0])) == pytest.approx(-1.0)
    assert h.contains(np.array([1.0, -2.0]))
    assert not h.contains(np.array([0.5, 0.0]))
    # default tolerance scales with the point
    big = np.array([1.0 - 1e-10, 1e6])
    assert h.contains(big)


def test_membership_tol_scale():
    assert membership_tol(np.zeros(2)) == pytest.approx(1e-9)
    assert membership_tol(np.array([1e3, 0.0])) == pytest.approx(1e-6)


def test_projection_properties():
    rng = np.random.default_rng(10)
    for _ in range(50):
        d = int(rng.integers(1, 5))
        a = rng.normal(size=d)
        h = normalize_halfspace(a, float(rng.normal()))
        x = rng.normal(size=d) * 3.0
        p = project_halfspace(x, h)
        assert h.signed_gap(p) >= -1e-12
        # projection is idempotent and moves along the normal only
        assert np.allclose(project_halfspace(p, h), p)
        if h.signed_gap(x) < 0.0:
            assert np.linalg.norm(p - x) == pytest.approx(-h.signed_gap(x))
        else:
            assert p is not x and np.array_equal(p, x)


def test_reflection_involution_and_isometry():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d = int(rng.integers(1, 5))
        h = normalize_halfspace(rng.normal(size=d), float(rng.normal()))
        x = rng.normal(size=d) * 2.0
        y = rng.normal(size=d) * 2.0
        rx, ry = reflect(x, h), reflect(y, h)
        assert np.allclose(reflect(rx, h), x)
        assert np.linalg.norm(rx - ry) == pytest.approx(np.linalg.norm(x - y))
        assert h.signed_gap(rx) == pytest.approx(-h.signed_gap(x))


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball(np.zeros(2), -1.0)
    assert Ball(np.zeros(3), 0.0).dimension == 3


def test_sphere_sampler_unit_norm_and_determinism():
    rng = np.random.Generator(np.random.PCG64(123))
    pts = sample_unit_sphere_batch(4, 257, rng)
    assert pts.shape == (257, 4)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    rng2 = np.random.Generator(np.random.PCG64(123))
    assert np.array_equal(sample_unit_sphere_batch(4, 257, rng2), pts)


def test_sphere_sampler_chunk_invariance():
    rng1 = np.random.Generator(np.random.PCG64(9))
    whole = sample_unit_sphere_batch(3, 100, rng1)
    rng2 = np.random.Generator(np.random.PCG64(9))
    first = sample_unit_sphere_batch(3, 60, rng2)
    second = sample_unit_sphere_batch(3, 40, rng2)
    assert np.array_equal(np.vstack([first, second]), whole)


def test_sphere_sampler_1d_is_signs():
    rng = np.random.Generator(np.random.PCG64(7))
    pts = sample_unit_sphere_batch(1, 500, rng)
    assert set(np.unique(pts)) == {-1.0, 1.0}
    assert sample_unit_sphere(1, rng).shape == (1,)


def test_worker_streams_disjoint_and_deterministic():
    a = worker_stream(42, 0).standard_normal(8)
    b = worker_stream(42, 1).standard_normal(8)
    a2 = worker_stream(42, 0).standard_normal(8)
    assert np.array_equal(a, a2)
    assert not np.allclose(a, b)
