"""Visibility geometry: angular-sweep polygons, specular reflection, predicates.

Two equivalent views of the same physics live here. The *predicates*
(`direct_visible_mask`, `facet_visible_mask`) answer per-point visibility
questions and drive coverage grids; the *region builders*
(`visibility_polygon`, `mirror_view_region`) produce explicit polygons for
areas and display. Both treat only plan walls and obstacles as occluders:
mirror footprints never block sight lines, so adding a mirror can only add
coverage.

Reflection uses the virtual-camera construction: the view through a planar
facet equals the direct view from the camera's mirror image, restricted to
rays that pass through the facet segment (the "window") and clipped to the
facet's reflective half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import first_hit, segment_blocked
from ._kernels import point_in_polygon as _pip
from .errors import InvalidGeometryError, InvalidSceneError
from .scene import Camera, Facet, FloorPlan, Mirror, Point2, polygon_area

# Angular nudge around segment endpoints in the sweep. Hit points of the
# nudged rays land on real walls, so convex-room areas stay exact.
_SWEEP_EPS = 1e-6
# Open-interval margin for "does anything cut this sight segment" tests.
_BLOCK_EPS = 1e-9
_TWO_PI = 2.0 * math.pi


def reflect_point(p: Point2, line: tuple[Point2, Point2]) -> Point2:
    """Mirror image of ``p`` across the infinite line through the segment."""
    (ax, ay), (bx, by) = line
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        raise InvalidGeometryError("cannot reflect across a degenerate line")
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / len2
    fx, fy = ax + t * dx, ay + t * dy
    return (2.0 * fx - p[0], 2.0 * fy - p[1])


@dataclass(frozen=True)
class VisRegion:
    """Union of simple polygons with a provenance tag.

    provenance is ``("direct",)`` or ``("via_mirror", mirror_id, facet_index)``
    per piece; pieces and tags run parallel.
    """

    pieces: tuple[tuple[Point2, ...], ...]
    provenance: tuple[tuple, ...]

    def area(self) -> float:
        """Sum of piece areas (pieces of one flat mirror never overlap)."""
        return sum(abs(polygon_area(p)) for p in self.pieces)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Point membership, edge-inclusive, for an (N, 2) array."""
        px = np.ascontiguousarray(pts[:, 0], dtype=np.float64)
        py = np.ascontiguousarray(pts[:, 1], dtype=np.float64)
        out = np.zeros(len(px), dtype=bool)
        for poly in self.pieces:
            vx = np.asarray([v[0] for v in poly])
            vy = np.asarray([v[1] for v in poly])
            out |= _pip(px, py, vx, vy) >= 1
        return out

    def contains_point(self, p: Point2) -> bool:
        return bool(self.contains(np.asarray([p], dtype=np.float64))[0])


def _wrap_offset(angles: np.ndarray, start: float) -> np.ndarray:
    return np.mod(angles - start, _TWO_PI)


def _sweep_hits(origin: Point2, offsets: np.ndarray, start: float,
                segs: np.ndarray) -> list[Point2]:
    """Cast rays at start+offset angles, return finite hit points in order."""
    ang = start + np.sort(offsets)
    ox = np.full(ang.shape, origin[0])
    oy = np.full(ang.shape, origin[1])
    t, _ = first_hit(ox, oy, np.cos(ang), np.sin(ang), segs, 1e-12)
    pts: list[Point2] = []
    for k in range(len(ang)):
        if not math.isfinite(t[k]):
            continue
        x = origin[0] + t[k] * math.cos(ang[k])
        y = origin[1] + t[k] * math.sin(ang[k])
        if pts and abs(pts[-1][0] - x) < 1e-12 and abs(pts[-1][1] - y) < 1e-12:
            continue
        pts.append((x, y))
    return pts


def _sweep_polygon(origin: Point2, yaw: float, fov: float,
                   segs: np.ndarray) -> tuple[Point2, ...]:
    """Angular-sweep visibility polygon from ``origin`` within a FOV wedge."""
    ends = np.concatenate([segs[:, 0:2], segs[:, 2:4]], axis=0)
    theta = np.arctan2(ends[:, 1] - origin[1], ends[:, 0] - origin[0])
    cand = np.concatenate([theta - _SWEEP_EPS, theta, theta + _SWEEP_EPS])
    full = fov >= _TWO_PI - 1e-12
    if full:
        offs = np.mod(cand, _TWO_PI)
        pts = _sweep_hits(origin, offs, 0.0, segs)
        if len(pts) >= 2 and abs(pts[0][0] - pts[-1][0]) < 1e-12 \
                and abs(pts[0][1] - pts[-1][1]) < 1e-12:
            pts.pop()
        return tuple(pts) if len(pts) >= 3 else ()
    start = yaw - fov / 2.0
    offs = _wrap_offset(cand, start)
    offs = offs[offs <= fov]
    offs = np.concatenate([offs, [0.0, fov]])
    pts = _sweep_hits(origin, offs, start, segs)
    if len(pts) < 2:
        return ()
    return (origin, *pts)


def visibility_polygon(origin: Point2, yaw: float, fov: float,
                       plan: FloorPlan, occluders=()) -> VisRegion:
    """Direct-vision region from ``origin`` within the yaw-centered wedge.

    ``occluders`` is an optional iterable of extra blocking segments
    ((x0, y0), (x1, y1)); the plan's walls and obstacles always occlude.
    """
    if not plan.contains_point(origin):
        raise InvalidSceneError(f"visibility origin {origin} outside free space")
    segs = plan.wall_segments()
    if occluders:
        extra = np.asarray([(a[0], a[1], b[0], b[1]) for a, b in occluders],
                           dtype=np.float64)
        segs = np.concatenate([segs, extra], axis=0)
    poly = _sweep_polygon(origin, yaw, fov, segs)
    pieces = (poly,) if poly else ()
    return VisRegion(pieces=pieces, provenance=(("direct",),) * len(pieces))


def _in_fov(angles: np.ndarray, yaw: float, fov: float) -> np.ndarray:
    if fov >= _TWO_PI - 1e-12:
        return np.ones(angles.shape, dtype=bool)
    return _wrap_offset(angles, yaw - fov / 2.0) <= fov


def direct_visible_mask(pts: np.ndarray, camera: Camera, plan: FloorPlan) -> np.ndarray:
    """Which (N, 2) points the camera sees directly (walls occlude, FOV applies)."""
    cx, cy = camera.position
    px = np.ascontiguousarray(pts[:, 0], dtype=np.float64)
    py = np.ascontiguousarray(pts[:, 1], dtype=np.float64)
    ang = np.arctan2(py - cy, px - cx)
    ok = _in_fov(ang, camera.yaw, camera.fov)
    blocked = segment_blocked(np.full_like(px, cx), np.full_like(py, cy),
                              px, py, plan.wall_segments(),
                              _BLOCK_EPS, 1.0 - _BLOCK_EPS)
    return ok & (blocked == 0)


def facet_visible_mask(pts: np.ndarray, camera: Camera, facet: Facet,
                       plan: FloorPlan) -> np.ndarray:
    """Which points are seen via one reflection off ``facet``.

    A point is visible when the camera-to-window leg lies in the FOV and both
    legs of the folded sight line (camera->window, window->point) clear the
    walls; the window is where the virtual-camera ray crosses the facet.
    """
    (ax, ay), (bx, by) = facet.a, facet.b
    nx, ny = facet.normal
    cx, cy = camera.position
    n_pts = len(pts)
    out = np.zeros(n_pts, dtype=bool)
    side_c = (cx - ax) * nx + (cy - ay) * ny
    if side_c <= 1e-12:
        return out
    vx, vy = reflect_point((cx, cy), (facet.a, facet.b))
    px = np.ascontiguousarray(pts[:, 0], dtype=np.float64)
    py = np.ascontiguousarray(pts[:, 1], dtype=np.float64)
    front = (px - ax) * nx + (py - ay) * ny > 1e-12
    # crossing of segment (virtual camera -> point) with the facet segment
    rx, ry = px - vx, py - vy
    sx, sy = bx - ax, by - ay
    denom = rx * sy - ry * sx
    wx, wy = ax - vx, ay - vy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (wx * sy - wy * sx) / denom
        u = (wx * ry - wy * rx) / denom
    valid = front & (denom != 0.0) & (t > 0.0) & (t < 1.0) & (u >= 0.0) & (u <= 1.0)
    if not valid.any():
        return out
    gx = ax + u * sx
    gy = ay + u * sy
    ang = np.arctan2(gy - cy, gx - cx)
    valid &= _in_fov(ang, camera.yaw, camera.fov)
    idx = np.nonzero(valid)[0]
    if len(idx) == 0:
        return out
    walls = plan.wall_segments()
    gxi = np.ascontiguousarray(gx[idx])
    gyi = np.ascontiguousarray(gy[idx])
    leg1 = segment_blocked(np.full(len(idx), cx), np.full(len(idx), cy),
                           gxi, gyi, walls, _BLOCK_EPS, 1.0 - _BLOCK_EPS)
    leg2 = segment_blocked(gxi, gyi,
                           np.ascontiguousarray(px[idx]),
                           np.ascontiguousarray(py[idx]),
                           walls, _BLOCK_EPS, 1.0 - _BLOCK_EPS)
    out[idx] = (leg1 == 0) & (leg2 == 0)
    return out


def mirror_visible_mask(pts: np.ndarray, camera: Camera, mirror: Mirror,
                        plan: FloorPlan) -> np.ndarray:
    """Union of the mirror's facet predicates."""
    out = np.zeros(len(pts), dtype=bool)
    for facet in mirror.facets():
        out |= facet_visible_mask(pts, camera, facet, plan)
    return out


# ---------------------------------------------------------------------------
# Mirror view region as explicit polygons


def _ray_hits_segment(origin: Point2, direction: Point2,
                      a: Point2, b: Point2) -> float | None:
    """Parameter along segment ab where the forward ray crosses it, or None."""
    rx, ry = direction
    sx, sy = b[0] - a[0], b[1] - a[1]
    denom = rx * sy - ry * sx
    if denom == 0.0:
        return None
    wx, wy = a[0] - origin[0], a[1] - origin[1]
    t = (wx * sy - wy * sx) / denom
    u = (wx * ry - wy * rx) / denom
    if t > 1e-12 and 0.0 <= u <= 1.0:
        return u
    return None


def visible_windows(camera: Camera, facet: Facet, plan: FloorPlan,
                    eps: float = 1e-9) -> list[tuple[float, float]]:
    """Sub-intervals of the facet (by segment parameter) the camera can see.

    Candidate breakpoints are the facet ends, wall crossings of the facet
    line, shadow edges cast by wall endpoints, and the FOV boundary rays;
    between breakpoints visibility is constant and tested at the midpoint.
    """
    a, b = facet.a, facet.b
    cx, cy = camera.position
    side_c = (cx - a[0]) * facet.normal[0] + (cy - a[1]) * facet.normal[1]
    if side_c <= 1e-12:
        return []
    cuts = {0.0, 1.0}
    walls = plan.wall_segments()
    for j in range(walls.shape[0]):
        w0 = (walls[j, 0], walls[j, 1])
        w1 = (walls[j, 2], walls[j, 3])
        # wall crossing the facet line
        u = _ray_hits_segment(w0, (w1[0] - w0[0], w1[1] - w0[1]), a, b)
        if u is not None:
            cuts.add(min(1.0, max(0.0, u)))
        # shadow edges from wall endpoints
        for e in (w0, w1):
            u = _ray_hits_segment((cx, cy), (e[0] - cx, e[1] - cy), a, b)
            if u is not None:
                cuts.add(u)
    if camera.fov < _TWO_PI - 1e-12:
        for bound in (camera.yaw - camera.fov / 2.0, camera.yaw + camera.fov / 2.0):
            u = _ray_hits_segment((cx, cy), (math.cos(bound), math.sin(bound)), a, b)
            if u is not None:
                cuts.add(u)
    ts = sorted(cuts)
    windows: list[tuple[float, float]] = []
    for t0, t1 in zip(ts[:-1], ts[1:]):
        if t1 - t0 < eps:
            continue
        tm = (t0 + t1) / 2.0
        gx = a[0] + tm * (b[0] - a[0])
        gy = a[1] + tm * (b[1] - a[1])
        ang = math.atan2(gy - cy, gx - cx)
        if not _in_fov(np.asarray([ang]), camera.yaw, camera.fov)[0]:
            continue
        blocked = segment_blocked(np.asarray([cx]), np.asarray([cy]),
                                  np.asarray([gx]), np.asarray([gy]),
                                  walls, _BLOCK_EPS, 1.0 - _BLOCK_EPS)
        if blocked[0]:
            continue
        if windows and abs(windows[-1][1] - t0) < eps:
            windows[-1] = (windows[-1][0], t1)
        else:
            windows.append((t0, t1))
    return windows


def _clip_segments_front(segs: np.ndarray, a: Point2, normal: Point2,
                         eps: float = 1e-12) -> np.ndarray:
    """Keep only the parts of each segment strictly on the reflective side."""
    if segs.shape[0] == 0:
        return segs
    d0 = (segs[:, 0] - a[0]) * normal[0] + (segs[:, 1] - a[1]) * normal[1]
    d1 = (segs[:, 2] - a[0]) * normal[0] + (segs[:, 3] - a[1]) * normal[1]
    rows = []
    for j in range(segs.shape[0]):
        p = segs[j, 0:2].copy()
        q = segs[j, 2:4].copy()
        dp, dq = d0[j], d1[j]
        if dp <= eps and dq <= eps:
            continue
        if dp < eps <= dq:
            s = (eps - dp) / (dq - dp)
            p = p + s * (q - p)
        elif dq < eps <= dp:
            s = (eps - dq) / (dp - dq)
            q = q + s * (p - q)
        rows.append((p[0], p[1], q[0], q[1]))
    if not rows:
        return np.zeros((0, 4))
    return np.asarray(rows, dtype=np.float64)


def _clip_polygon_halfplane(poly: tuple[Point2, ...], a: Point2,
                            normal: Point2) -> tuple[Point2, ...]:
    """Sutherland-Hodgman clip of ``poly`` to dot(normal, p - a) >= 0."""
    if not poly:
        return ()
    def dist(p):
        return (p[0] - a[0]) * normal[0] + (p[1] - a[1]) * normal[1]
    out: list[Point2] = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dp, dq = dist(p), dist(q)
        if dp >= 0.0:
            out.append(p)
            if dq < 0.0:
                s = dp / (dp - dq)
                out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
        elif dq >= 0.0:
            s = dp / (dp - dq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return tuple(out) if len(out) >= 3 else ()


def mirror_view_region(camera: Camera, mirror: Mirror, plan: FloorPlan) -> VisRegion:
    """Region seen via single-bounce reflection off the mirror.

    Per facet: reflect the camera to a virtual viewpoint, sweep a visibility
    polygon through each camera-visible window of the facet (occluders
    clipped to the reflective half-plane), and clip the result back to that
    half-plane. An empty region is a valid result.
    """
    pieces: list[tuple[Point2, ...]] = []
    tags: list[tuple] = []
    walls = plan.wall_segments()
    for fi, facet in enumerate(mirror.facets()):
        windows = visible_windows(camera, facet, plan)
        if not windows:
            continue
        v = reflect_point(camera.position, (facet.a, facet.b))
        front = _clip_segments_front(walls, facet.a, facet.normal)
        if front.shape[0] == 0:
            continue
        ax, ay = facet.a
        sx, sy = facet.b[0] - ax, facet.b[1] - ay
        for (t0, t1) in windows:
            w0 = (ax + t0 * sx, ay + t0 * sy)
            w1 = (ax + t1 * sx, ay + t1 * sy)
            phi0 = math.atan2(w0[1] - v[1], w0[0] - v[0])
            phi1 = math.atan2(w1[1] - v[1], w1[0] - v[0])
            sweep = math.remainder(phi1 - phi0, _TWO_PI)
            if abs(sweep) < 1e-12:
                continue
            start = phi0 if sweep > 0 else phi1
            poly = _sweep_polygon(v, start + abs(sweep) / 2.0, abs(sweep), front)
            if not poly:
                continue
            clipped = _clip_polygon_halfplane(poly, facet.a, facet.normal)
            if clipped and abs(polygon_area(clipped)) > 1e-12:
                pieces.append(clipped)
                tags.append(("via_mirror", mirror.id, fi))
    return VisRegion(pieces=tuple(pieces), provenance=tuple(tags))
