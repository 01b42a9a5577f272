# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the geometry kernels.

Same arithmetic, element order and tie-breaking as ``_pykernels``; the two
backends are expected to agree bit for bit (see tests/test_kernels.py).
"""

import numpy as np

from libc.math cimport INFINITY, fabs


def segment_blocked(double[::1] px, double[::1] py,
                    double[::1] qx, double[::1] qy,
                    double[:, ::1] segs, double t_lo, double t_hi):
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t m = segs.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double rx, ry, ax, ay, sx, sy, wx, wy, denom, t, u
    for i in range(n):
        rx = qx[i] - px[i]
        ry = qy[i] - py[i]
        for j in range(m):
            ax = segs[j, 0]
            ay = segs[j, 1]
            sx = segs[j, 2] - segs[j, 0]
            sy = segs[j, 3] - segs[j, 1]
            denom = rx * sy - ry * sx
            if denom == 0.0:
                continue
            wx = ax - px[i]
            wy = ay - py[i]
            t = (wx * sy - wy * sx) / denom
            u = (wx * ry - wy * rx) / denom
            if t > t_lo and t < t_hi and u >= 0.0 and u <= 1.0:
                out[i] = 1
                break
    return out_arr


def first_hit(double[::1] ox, double[::1] oy,
              double[::1] dx, double[::1] dy,
              double[:, ::1] segs, double t_min):
    cdef Py_ssize_t n = ox.shape[0]
    cdef Py_ssize_t m = segs.shape[0]
    t_arr = np.full(n, np.inf)
    idx_arr = np.full(n, -1, dtype=np.int64)
    cdef double[::1] t_best = t_arr
    cdef long long[::1] idx_best = idx_arr
    cdef Py_ssize_t i, j
    cdef double rx, ry, ax, ay, sx, sy, wx, wy, denom, t, u, tb
    cdef long long kb
    for i in range(n):
        rx = dx[i]
        ry = dy[i]
        tb = INFINITY
        kb = -1
        for j in range(m):
            ax = segs[j, 0]
            ay = segs[j, 1]
            sx = segs[j, 2] - segs[j, 0]
            sy = segs[j, 3] - segs[j, 1]
            denom = rx * sy - ry * sx
            if denom == 0.0:
                continue
            wx = ax - ox[i]
            wy = ay - oy[i]
            t = (wx * sy - wy * sx) / denom
            u = (wx * ry - wy * rx) / denom
            if t > t_min and u >= 0.0 and u <= 1.0 and t < tb:
                tb = t
                kb = j
        t_best[i] = tb
        idx_best[i] = kb
    return t_arr, idx_arr


def point_in_polygon(double[::1] px, double[::1] py,
                     double[::1] vx, double[::1] vy):
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t m = vx.shape[0]
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double ax, ay, bx, by, ex, ey, cross, dot, len2, tol, x_at
    cdef bint inside, on_edge
    for i in range(n):
        inside = 0
        on_edge = 0
        for j in range(m):
            ax = vx[j]
            ay = vy[j]
            bx = vx[(j + 1) % m]
            by = vy[(j + 1) % m]
            ex = bx - ax
            ey = by - ay
            cross = ex * (py[i] - ay) - ey * (px[i] - ax)
            dot = (px[i] - ax) * ex + (py[i] - ay) * ey
            len2 = ex * ex + ey * ey
            tol = 1e-12 * (len2 + 1.0)
            if fabs(cross) <= tol and dot >= -tol and dot <= len2 + tol:
                on_edge = 1
            if (ay > py[i]) != (by > py[i]):
                x_at = ax + (py[i] - ay) * ex / ey
                if px[i] < x_at:
                    inside = not inside
        if on_edge:
            out[i] = 2
        elif inside:
            out[i] = 1
    return out_arr
