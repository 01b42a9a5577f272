"""Backend parity: the Cython kernels must match the numpy fallback bit for bit."""

import math

import numpy as np
import pytest

from mirrorcov._kernels import BACKEND, _pykernels

try:
    from mirrorcov._kernels import _ckernels
except ImportError:
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="Cython kernels not built")


def _random_soup(rng, m):
    return rng.uniform(-10, 10, size=(m, 4))


@needs_c
def test_segment_blocked_parity():
    rng = np.random.default_rng(42)
    for _ in range(20):
        n, m = rng.integers(1, 400), rng.integers(0, 40)
        segs = _random_soup(rng, m)
        px, py, qx, qy = rng.uniform(-10, 10, size=(4, n))
        a = _pykernels.segment_blocked(px, py, qx, qy, segs, 1e-9, 1 - 1e-9)
        b = _ckernels.segment_blocked(px, py, qx, qy, segs, 1e-9, 1 - 1e-9)
        assert np.array_equal(a, b)


@needs_c
def test_first_hit_parity():
    rng = np.random.default_rng(43)
    for _ in range(20):
        n, m = rng.integers(1, 400), rng.integers(0, 40)
        segs = _random_soup(rng, m)
        ox, oy = rng.uniform(-10, 10, size=(2, n))
        ang = rng.uniform(0, 2 * math.pi, size=n)
        t1, i1 = _pykernels.first_hit(ox, oy, np.cos(ang), np.sin(ang), segs, 1e-12)
        t2, i2 = _ckernels.first_hit(ox, oy, np.cos(ang), np.sin(ang), segs, 1e-12)
        assert np.array_equal(t1, t2)
        assert np.array_equal(i1, i2)


@needs_c
def test_point_in_polygon_parity():
    rng = np.random.default_rng(44)
    poly_x = np.array([0.0, 4.0, 4.0, 2.0, 2.0, 0.0])
    poly_y = np.array([0.0, 0.0, 2.0, 2.0, 4.0, 4.0])
    pts = rng.uniform(-1, 5, size=(5000, 2))
    # include exact edge and vertex points
    edge_pts = np.array([[2.0, 0.0], [4.0, 1.0], [2.0, 3.0], [0.0, 0.0], [1.0, 4.0]])
    px = np.concatenate([pts[:, 0], edge_pts[:, 0]])
    py = np.concatenate([pts[:, 1], edge_pts[:, 1]])
    a = _pykernels.point_in_polygon(px, py, poly_x, poly_y)
    b = _ckernels.point_in_polygon(px, py, poly_x, poly_y)
    assert np.array_equal(a, b)
    assert (a[-5:] == 2).all()


def test_backend_reported():
    assert BACKEND in ("c", "python")


def test_first_hit_basics():
    segs = np.array([[0.0, 0.0, 4.0, 0.0], [4.0, 0.0, 4.0, 4.0],
                     [4.0, 4.0, 0.0, 4.0], [0.0, 4.0, 0.0, 0.0]])
    t, idx = _pykernels.first_hit(np.array([2.0]), np.array([2.0]),
                                  np.array([1.0]), np.array([0.0]), segs, 1e-12)
    assert t[0] == pytest.approx(2.0)
    assert idx[0] == 1
    t, idx = _pykernels.first_hit(np.array([2.0]), np.array([2.0]),
                                  np.array([1.0]), np.array([0.0]),
                                  np.zeros((0, 4)), 1e-12)
    assert math.isinf(t[0]) and idx[0] == -1


def test_blocked_open_interval_excludes_endpoints():
    segs = np.array([[0.0, 0.0, 4.0, 0.0]])
    # sight line ending exactly on the wall is not cut by it
    blocked = _pykernels.segment_blocked(
        np.array([2.0]), np.array([2.0]), np.array([2.0]), np.array([0.0]),
        segs, 1e-9, 1 - 1e-9)
    assert blocked[0] == 0
    blocked = _pykernels.segment_blocked(
        np.array([2.0]), np.array([2.0]), np.array([2.0]), np.array([-1.0]),
        segs, 1e-9, 1 - 1e-9)
    assert blocked[0] == 1
