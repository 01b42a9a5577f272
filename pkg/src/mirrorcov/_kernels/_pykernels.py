"""Numpy implementations of the geometry kernels.

These are the reference semantics; the Cython backend in ``_ckernels.pyx``
implements the same arithmetic element by element, so results match
bit for bit. Inputs are float64 arrays; segment soups are (M, 4) arrays
of ``x0, y0, x1, y1`` rows.
"""

import numpy as np

# Chunk size for the N x M broadcasts so the batch variants stay at a
# bounded working-set size even for 100k+ queries.
_CHUNK = 8192


def segment_blocked(px, py, qx, qy, segs, t_lo, t_hi):
    """For each query segment P->Q, report whether any soup segment cuts it.

    A cut means intersection parameters t in (t_lo, t_hi) along P->Q and
    u in [0, 1] along the soup segment. Parallel overlap never blocks.
    Returns a uint8 array.
    """
    n = px.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    if segs.shape[0] == 0 or n == 0:
        return out
    ax = segs[:, 0]
    ay = segs[:, 1]
    sx = segs[:, 2] - segs[:, 0]
    sy = segs[:, 3] - segs[:, 1]
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        rx = (qx[lo:hi] - px[lo:hi])[:, None]
        ry = (qy[lo:hi] - py[lo:hi])[:, None]
        wx = ax[None, :] - px[lo:hi, None]
        wy = ay[None, :] - py[lo:hi, None]
        denom = rx * sy[None, :] - ry * sx[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (wx * sy[None, :] - wy * sx[None, :]) / denom
            u = (wx * ry - wy * rx) / denom
        hit = (denom != 0.0) & (t > t_lo) & (t < t_hi) & (u >= 0.0) & (u <= 1.0)
        out[lo:hi] = hit.any(axis=1)
    return out


def first_hit(ox, oy, dx, dy, segs, t_min):
    """First intersection of each ray origin+t*dir with the soup.

    Returns (t, index); t is +inf and index -1 where nothing is hit.
    Only hits with t > t_min and u in [0, 1] count; ties keep the
    lowest segment index.
    """
    n = ox.shape[0]
    t_best = np.full(n, np.inf)
    idx_best = np.full(n, -1, dtype=np.int64)
    if segs.shape[0] == 0 or n == 0:
        return t_best, idx_best
    ax = segs[:, 0]
    ay = segs[:, 1]
    sx = segs[:, 2] - segs[:, 0]
    sy = segs[:, 3] - segs[:, 1]
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        rx = dx[lo:hi][:, None]
        ry = dy[lo:hi][:, None]
        wx = ax[None, :] - ox[lo:hi, None]
        wy = ay[None, :] - oy[lo:hi, None]
        denom = rx * sy[None, :] - ry * sx[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (wx * sy[None, :] - wy * sx[None, :]) / denom
            u = (wx * ry - wy * rx) / denom
        valid = (denom != 0.0) & (t > t_min) & (u >= 0.0) & (u <= 1.0)
        t = np.where(valid, t, np.inf)
        k = np.argmin(t, axis=1)
        rows = np.arange(hi - lo)
        tb = t[rows, k]
        t_best[lo:hi] = tb
        idx_best[lo:hi] = np.where(np.isfinite(tb), k, -1)
    return t_best, idx_best


def point_in_polygon(px, py, vx, vy):
    """Classify points against a polygon: 0 outside, 1 inside, 2 on an edge.

    Crossing-number test with strict comparisons; the on-edge check uses a
    cross-product tolerance scaled by the edge length so that points meant
    to sit exactly on an edge classify as 2 regardless of winding.
    """
    n = px.shape[0]
    m = vx.shape[0]
    inside = np.zeros(n, dtype=bool)
    on_edge = np.zeros(n, dtype=bool)
    for j in range(m):
        ax_ = vx[j]
        ay_ = vy[j]
        bx_ = vx[(j + 1) % m]
        by_ = vy[(j + 1) % m]
        ex = bx_ - ax_
        ey = by_ - ay_
        cross = ex * (py - ay_) - ey * (px - ax_)
        dot = (px - ax_) * ex + (py - ay_) * ey
        len2 = ex * ex + ey * ey
        tol = 1e-12 * (len2 + 1.0)
        on_edge |= (np.abs(cross) <= tol) & (dot >= -tol) & (dot <= len2 + tol)
        crosses = ((ay_ > py) != (by_ > py))
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = ax_ + (py - ay_) * ex / ey
        inside ^= crosses & (px < np.where(crosses, x_at, np.inf))
    out = np.zeros(n, dtype=np.uint8)
    out[inside] = 1
    out[on_edge] = 2
    return out
