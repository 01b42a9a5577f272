"""Shared scene fixtures and seeded random scene generation for tests."""

import math

import numpy as np

from mirrorcov.scene import FLAT, Camera, Curvature, FloorPlan, Mirror, Scene, Zone


def square_room(side=4.0):
    return FloorPlan(boundary=((0, 0), (side, 0), (side, side), (0, side)))


def pillar_room(side=6.0):
    """Square room with a centered square pillar."""
    c = side / 2.0
    return FloorPlan(
        boundary=((0, 0), (side, 0), (side, side), (0, side)),
        obstacles=(((c - 0.5, c - 0.5), (c - 0.5, c + 0.5),
                    (c + 0.5, c + 0.5), (c + 0.5, c - 0.5)),))


def l_room():
    """Hall 4x2 with a 2x2 arm on top of its left half."""
    return FloorPlan(boundary=((0, 0), (4, 0), (4, 2), (2, 2), (2, 4), (0, 4)))


def l_room_corner_mirror():
    """L room, camera deep in the hall, 45-degree mirror at the inner corner."""
    plan = l_room()
    camera = Camera(position=(3.5, 1.0), yaw=math.pi, fov=2 * math.pi)
    mirror = Mirror(id=1, segment=((1.6, 1.6), (2.2, 1.0)), facing=(1.0, 1.0))
    return Scene(plan=plan, camera=camera, mirrors=(mirror,))


def _rect(x0, y0, x1, y1, clockwise):
    pts = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    return tuple(reversed(pts)) if clockwise else pts


def random_room_scene(seed, n_mirrors=1, flat_only=False):
    """Seeded irregular room with pillars and inward-facing wall mirrors."""
    rng = np.random.default_rng(seed)
    w = float(rng.uniform(6, 12))
    h = float(rng.uniform(6, 12))
    shape = rng.integers(0, 3)
    if shape == 0:
        boundary = _rect(0, 0, w, h, clockwise=False)
    elif shape == 1:  # L: cut the top-right quadrant
        cx = float(rng.uniform(0.4, 0.6)) * w
        cy = float(rng.uniform(0.4, 0.6)) * h
        boundary = ((0, 0), (w, 0), (w, cy), (cx, cy), (cx, h), (0, h))
    else:  # T: notches cut from both top corners
        cx0 = float(rng.uniform(0.2, 0.35)) * w
        cx1 = float(rng.uniform(0.65, 0.8)) * w
        cy = float(rng.uniform(0.45, 0.6)) * h
        boundary = ((0, 0), (w, 0), (w, cy), (cx1, cy), (cx1, h),
                    (cx0, h), (cx0, cy), (0, cy))
    obstacles = []
    if rng.random() < 0.7:
        px = float(rng.uniform(0.15 * w, 0.5 * w))
        py = float(rng.uniform(0.15 * h, 0.4 * h))
        s = float(rng.uniform(0.4, 1.0))
        obstacles.append(_rect(px, py, px + s, py + s, clockwise=True))
    plan = FloorPlan(boundary=tuple(boundary), obstacles=tuple(obstacles))

    # camera in free space, biased toward the lower-right quadrant
    for _ in range(100):
        pos = (float(rng.uniform(0.55 * w, 0.95 * w)),
               float(rng.uniform(0.1 * h, 0.4 * h)))
        if plan.contains_point(pos) and not any(
                _point_near_poly(pos, obs, 0.3) for obs in plan.obstacles):
            break
    yaw = float(rng.uniform(0, 2 * math.pi))
    fov = float(rng.uniform(math.pi / 2, 2 * math.pi))
    camera = Camera(position=pos, yaw=yaw, fov=fov)

    mirrors = []
    mid = 1
    for _ in range(200):
        if len(mirrors) >= n_mirrors:
            break
        edges = list(zip(boundary, boundary[1:] + boundary[:1]))
        a, b = edges[rng.integers(0, len(edges))]
        ex, ey = b[0] - a[0], b[1] - a[1]
        elen = math.hypot(ex, ey)
        mlen = float(rng.uniform(0.5, min(1.5, 0.8 * elen)))
        t0 = float(rng.uniform(0.05, 0.95 - mlen / elen)) if elen > mlen / 0.9 else 0.1
        # inward normal of a CCW boundary edge
        nx, ny = -ey / elen, ex / elen
        tilt = float(rng.uniform(-0.5, 0.5))
        ct, st = math.cos(tilt), math.sin(tilt)
        dx, dy = (ex / elen) * ct - (ey / elen) * st, (ex / elen) * st + (ey / elen) * ct
        cx = a[0] + (t0 + mlen / elen / 2) * ex + nx * (0.02 + mlen / 2 * abs(st))
        cy = a[1] + (t0 + mlen / elen / 2) * ey + ny * (0.02 + mlen / 2 * abs(st))
        p0 = (cx - dx * mlen / 2, cy - dy * mlen / 2)
        p1 = (cx + dx * mlen / 2, cy + dy * mlen / 2)
        if not (plan.contains_point(p0) and plan.contains_point(p1)):
            continue
        curv = FLAT
        if not flat_only and rng.random() < 0.4:
            curv = Curvature("convex", radius=float(rng.uniform(0.75, 4.0)) * mlen,
                             facet_count=int(rng.integers(2, 9)))
        try:
            mirrors.append(Mirror(id=mid, segment=(p0, p1), facing=(nx, ny),
                                  curvature=curv))
        except Exception:
            continue
        mid += 1
    return Scene(plan=plan, camera=camera, mirrors=tuple(mirrors))


def _point_near_poly(p, poly, margin):
    xs = [q[0] for q in poly]
    ys = [q[1] for q in poly]
    return (min(xs) - margin <= p[0] <= max(xs) + margin
            and min(ys) - margin <= p[1] <= max(ys) + margin)


def sample_free_points(plan, n, seed):
    """Seeded uniform sample of free-space points."""
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = plan.bbox()
    out = []
    while len(out) < n:
        pts = rng.uniform((x0, y0), (x1, y1), size=(n, 2))
        keep = pts[plan.contains(pts)]
        out.extend(map(tuple, keep))
    return np.asarray(out[:n], dtype=np.float64)
