"""Mirror placement optimization by simulated annealing.

The search state is a set of mirrors, each described by a mount index, a
position parameter along the mount rail, a facing yaw and an optional convex
radius. Moves add, remove or perturb one mirror; acceptance follows the
Metropolis rule under a seeded generator, so a run is a pure function of
(scene, mounts, config).

The objective rewards covered target-zone cells and penalizes non-interest
cells caught in any mirror's reflected view plus the mirror count:

    score = w_cover * coverage_fraction
          - w_leak  * leakage_fraction
          - w_count * mirror_count / max_mirrors
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace as _dc_replace

import numpy as np

from ._kernels import point_in_polygon, segment_blocked
from .coverage import DEFAULT_CELL_SIZE, coverage_map
from .errors import InvalidArgumentError, ValidationError
from .geometry import direct_visible_mask, mirror_visible_mask
from .scene import FLAT, Curvature, Mirror, Point2, Scene


@dataclass(frozen=True)
class MountSegment:
    """Rail along a wall that a mirror center may slide on."""

    segment: tuple[Point2, Point2]
    allowed_yaw: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.allowed_yaw
        if hi < lo:
            raise ValidationError("allowed_yaw interval must satisfy lo <= hi")


@dataclass(frozen=True)
class PlannerConfig:
    max_mirrors: int = 2
    weights: tuple[float, float, float] = (1.0, 2.0, 0.05)
    iterations: int = 1200
    initial_temperature: float = 0.08
    cooling: float = 0.995
    seed: int = 0
    cell_size: float = DEFAULT_CELL_SIZE
    # geometry of planned mirrors
    mirror_length: float = 0.8
    z_bottom: float = 1.0
    z_top: float = 2.0
    facet_count: int = 8
    wall_margin: float = 0.02

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations must be >= 1")
        if not 0.0 < self.cooling < 1.0:
            raise ValidationError("cooling must lie in (0, 1)")
        if any(w < 0 for w in self.weights):
            raise ValidationError("weights must be non-negative")
        if self.max_mirrors < 0:
            raise ValidationError("max_mirrors must be >= 0")


@dataclass(frozen=True)
class Placement:
    mirrors: tuple[Mirror, ...]
    score: float
    coverage_fraction: float
    leakage_fraction: float
    direct_coverage_fraction: float = 0.0
    iterations: int = 0
    seed: int = 0


def placement_to_dict(p: Placement) -> dict:
    return {
        "mirrors": [
            {"id": m.id, "segment": [list(m.segment[0]), list(m.segment[1])],
             "facing": list(m.facing), "z_bottom": m.z_bottom, "z_top": m.z_top,
             "curvature": ({"kind": "flat"} if m.curvature.kind == "flat" else
                           {"kind": "convex", "radius": m.curvature.radius,
                            "facet_count": m.curvature.facet_count})}
            for m in p.mirrors
        ],
        "metrics": {
            "score": p.score,
            "coverage_fraction": p.coverage_fraction,
            "leakage_fraction": p.leakage_fraction,
            "direct_coverage_fraction": p.direct_coverage_fraction,
            "mirror_count": len(p.mirrors),
            "iterations": p.iterations,
            "seed": p.seed,
        },
    }


def mounts_from_obj(doc) -> list[MountSegment]:
    out = []
    for item in doc:
        seg = item["segment"]
        lo, hi = item["allowed_yaw"]
        out.append(MountSegment(
            segment=((float(seg[0][0]), float(seg[0][1])),
                     (float(seg[1][0]), float(seg[1][1]))),
            allowed_yaw=(float(lo), float(hi))))
    return out


# ---------------------------------------------------------------------------


def _zone_cell_points(scene: Scene, cell_size: float):
    """Free-space cell centers inside target / non-interest zones."""
    x0, y0, x1, y1 = scene.plan.bbox()
    nx = max(1, math.ceil((x1 - x0) / cell_size - 1e-9))
    ny = max(1, math.ceil((y1 - y0) / cell_size - 1e-9))
    xs = x0 + (np.arange(nx) + 0.5) * cell_size
    ys = y0 + (np.arange(ny) + 0.5) * cell_size
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    free = scene.plan.contains(pts)

    def zone_mask(kinds):
        mask = np.zeros(len(pts), dtype=bool)
        for z in scene.zones:
            if z.kind not in kinds:
                continue
            vx = np.asarray([v[0] for v in z.polygon])
            vy = np.asarray([v[1] for v in z.polygon])
            mask |= point_in_polygon(
                np.ascontiguousarray(pts[:, 0]),
                np.ascontiguousarray(pts[:, 1]), vx, vy) >= 1
        return mask & free

    return pts[zone_mask(("target",))], pts[zone_mask(("non_interest",))]


class _Evaluator:
    """Incremental objective: direct coverage is fixed, mirrors contribute
    per-mirror cell masks over the zone cells only."""

    def __init__(self, scene: Scene, config: PlannerConfig):
        self.scene = scene.without_mirrors()
        self.config = config
        self.target_pts, self.non_pts = _zone_cell_points(scene, config.cell_size)
        self.n_target = len(self.target_pts)
        self.n_non = len(self.non_pts)
        if self.n_target:
            self.direct_t = direct_visible_mask(self.target_pts, scene.camera,
                                                scene.plan)
        else:
            self.direct_t = np.zeros(0, dtype=bool)

    def mirror_masks(self, mirror: Mirror):
        t = (mirror_visible_mask(self.target_pts, self.scene.camera, mirror,
                                 self.scene.plan)
             if self.n_target else np.zeros(0, dtype=bool))
        n = (mirror_visible_mask(self.non_pts, self.scene.camera, mirror,
                                 self.scene.plan)
             if self.n_non else np.zeros(0, dtype=bool))
        return t, n

    def fractions(self, t_masks, n_masks):
        cov_t = self.direct_t.copy()
        for m in t_masks:
            cov_t |= m
        coverage = float(cov_t.sum()) / self.n_target if self.n_target else 0.0
        if self.n_non and n_masks:
            leak_mask = np.zeros(self.n_non, dtype=bool)
            for m in n_masks:
                leak_mask |= m
            leakage = float(leak_mask.sum()) / self.n_non
        else:
            leakage = 0.0
        return coverage, leakage

    def score(self, t_masks, n_masks, count):
        w_cover, w_leak, w_count = self.config.weights
        coverage, leakage = self.fractions(t_masks, n_masks)
        count_term = (count / self.config.max_mirrors
                      if self.config.max_mirrors else 0.0)
        return w_cover * coverage - w_leak * leakage - w_count * count_term


def objective(scene: Scene, config: PlannerConfig) -> float:
    """Score the scene as-is (all its mirrors included)."""
    grid = coverage_map(scene, config.cell_size)
    target_pts, non_pts = _zone_cell_points(scene, config.cell_size)
    covered = grid.covered()
    indirect_any = (grid.indirect.any(axis=0) if len(scene.mirrors)
                    else np.zeros_like(grid.free))

    def frac(pts, label):
        if len(pts) == 0:
            return 0.0
        hits = 0
        for x, y in pts:
            ix, iy = grid.cell_of((x, y))
            hits += bool(label[iy, ix])
        return hits / len(pts)

    coverage = frac(target_pts, covered)
    leakage = frac(non_pts, indirect_any & grid.free)
    w_cover, w_leak, w_count = config.weights
    count_term = (len(scene.mirrors) / config.max_mirrors
                  if config.max_mirrors else 0.0)
    return w_cover * coverage - w_leak * leakage - w_count * count_term


# ---------------------------------------------------------------------------


@dataclass
class _Params:
    mount: int
    t: float
    yaw: float
    radius: float  # 0.0 means flat


def _host_wall_normal(mount: MountSegment, scene: Scene) -> tuple[float, float]:
    """Inward normal of the wall edge hosting the mount."""
    walls = scene.plan.wall_segments()
    (p0, p1) = mount.segment
    for j in range(walls.shape[0]):
        a = walls[j, 0:2]
        b = walls[j, 2:4]
        if (_point_seg_dist(p0, a, b) < 1e-6 and
                _point_seg_dist(p1, a, b) < 1e-6):
            ex, ey = b[0] - a[0], b[1] - a[1]
            ln = math.hypot(ex, ey)
            for sgn in (1.0, -1.0):
                nx, ny = sgn * -ey / ln, sgn * ex / ln
                mid = ((p0[0] + p1[0]) / 2 + nx * 1e-4,
                       (p0[1] + p1[1]) / 2 + ny * 1e-4)
                if scene.plan.contains_point(mid):
                    return (nx, ny)
    raise InvalidArgumentError(
        f"mount segment {mount.segment} does not lie on a wall edge")


def _point_seg_dist(p, a, b) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    t = 0.0 if den == 0 else ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def _build_mirror(params: _Params, mounts, normals, config: PlannerConfig,
                  mirror_id: int) -> Mirror | None:
    mount = mounts[params.mount]
    (ax, ay), (bx, by) = mount.segment
    px = ax + params.t * (bx - ax)
    py = ay + params.t * (by - ay)
    nx, ny = normals[params.mount]
    dx, dy = -math.sin(params.yaw), math.cos(params.yaw)
    half = config.mirror_length / 2.0
    standoff = config.wall_margin + half * abs(dx * nx + dy * ny)
    cx, cy = px + nx * standoff, py + ny * standoff
    seg = ((cx - dx * half, cy - dy * half), (cx + dx * half, cy + dy * half))
    curv = FLAT
    if params.radius > 0.0:
        curv = Curvature("convex", radius=params.radius,
                         facet_count=config.facet_count)
    try:
        return Mirror(id=mirror_id, segment=seg,
                      facing=(math.cos(params.yaw), math.sin(params.yaw)),
                      z_bottom=config.z_bottom, z_top=config.z_top,
                      curvature=curv)
    except Exception:
        return None


def _mirror_valid(mirror: Mirror, scene: Scene) -> bool:
    walls = scene.plan.wall_segments()
    for f in mirror.facets():
        for p in (f.a, f.b):
            if not scene.plan.contains_point(p):
                return False
        cut = segment_blocked(
            np.asarray([f.a[0]]), np.asarray([f.a[1]]),
            np.asarray([f.b[0]]), np.asarray([f.b[1]]),
            walls, 1e-9, 1.0 - 1e-9)
        if cut[0]:
            return False
    return True


def _sample_radius(rng, config: PlannerConfig) -> float:
    if rng.random() < 0.5:
        return 0.0
    return config.mirror_length * float(rng.uniform(0.75, 4.0))


def optimize(scene: Scene, mounts: list[MountSegment],
             config: PlannerConfig) -> Placement:
    """Simulated annealing over mirror count, rail position, yaw and radius.

    Deterministic for fixed (scene, mounts, config); the best-ever state is
    returned, never scoring below the empty placement. Ties prefer fewer
    mirrors, then earlier discovery.
    """
    if not mounts:
        raise InvalidArgumentError("optimize requires at least one mount segment")
    normals = [_host_wall_normal(m, scene) for m in mounts]
    rng = np.random.default_rng(config.seed)
    ev = _Evaluator(scene, config)

    state: list[tuple[_Params, Mirror, np.ndarray, np.ndarray]] = []
    cur_score = ev.score([], [], 0)
    best_state: list = []
    best_score = cur_score
    t0 = config.initial_temperature
    temp = t0

    def masks_of(entries):
        return [e[2] for e in entries], [e[3] for e in entries]

    def random_params() -> _Params:
        mi = int(rng.integers(len(mounts)))
        t = float(rng.random())
        lo, hi = mounts[mi].allowed_yaw
        yaw = lo if hi == lo else float(rng.uniform(lo, hi))
        return _Params(mount=mi, t=t, yaw=yaw, radius=_sample_radius(rng, config))

    for it in range(config.iterations):
        kinds = ["add"] if not state else (
            ["remove", "perturb"] if len(state) >= config.max_mirrors
            else ["add", "remove", "perturb"])
        if config.max_mirrors == 0:
            break
        kind = kinds[int(rng.integers(len(kinds)))]
        tf = max(temp / t0, 0.05)
        proposal = None

        if kind == "add":
            params = random_params()
            mirror = _build_mirror(params, mounts, normals, config, len(state) + 1)
            if mirror is not None and _mirror_valid(mirror, scene):
                tm, nm = ev.mirror_masks(mirror)
                proposal = state + [(params, mirror, tm, nm)]
        elif kind == "remove":
            k = int(rng.integers(len(state)))
            proposal = state[:k] + state[k + 1:]
        else:
            k = int(rng.integers(len(state)))
            params = replace_params(state[k][0], rng, mounts, config, tf)
            mirror = _build_mirror(params, mounts, normals, config, k + 1)
            if mirror is not None and _mirror_valid(mirror, scene):
                tm, nm = ev.mirror_masks(mirror)
                proposal = state[:k] + [(params, mirror, tm, nm)] + state[k + 1:]

        if proposal is not None:
            tms, nms = masks_of(proposal)
            new_score = ev.score(tms, nms, len(proposal))
            delta = new_score - cur_score
            if delta >= 0 or rng.random() < math.exp(delta / max(temp, 1e-12)):
                state = proposal
                cur_score = new_score
                if (cur_score > best_score or
                        (cur_score == best_score and len(state) < len(best_state))):
                    best_score = cur_score
                    best_state = list(state)
        temp *= config.cooling

    mirrors = tuple(
        Mirror(id=i + 1, segment=e[1].segment, facing=e[1].facing,
               z_bottom=e[1].z_bottom, z_top=e[1].z_top, curvature=e[1].curvature)
        for i, e in enumerate(best_state))
    tms, nms = masks_of(best_state)
    coverage, leakage = ev.fractions(tms, nms)
    direct_cov = (float(ev.direct_t.sum()) / ev.n_target) if ev.n_target else 0.0
    return Placement(
        mirrors=mirrors, score=best_score, coverage_fraction=coverage,
        leakage_fraction=leakage, direct_coverage_fraction=direct_cov,
        iterations=config.iterations, seed=config.seed)


def replace_params(params: _Params, rng, mounts, config: PlannerConfig,
                   tf: float) -> _Params:
    """Perturb one aspect of a mirror; magnitudes shrink with temperature."""
    aspect = int(rng.integers(3))
    mount = mounts[params.mount]
    if aspect == 0:
        t = float(np.clip(params.t + rng.normal() * 0.25 * tf, 0.0, 1.0))
        return _Params(params.mount, t, params.yaw, params.radius)
    if aspect == 1:
        lo, hi = mount.allowed_yaw
        yaw = float(np.clip(params.yaw + rng.normal() * 0.4 * tf, lo, hi))
        return _Params(params.mount, params.t, yaw, params.radius)
    if params.radius <= 0.0:
        radius = _sample_radius(rng, config)
    else:
        radius = float(np.clip(
            params.radius * math.exp(rng.normal() * 0.5 * tf),
            0.6 * config.mirror_length, 8.0 * config.mirror_length))
        if rng.random() < 0.2:
            radius = 0.0
    return _Params(params.mount, params.t, params.yaw, radius)


def placement_scene(scene: Scene, placement: Placement) -> Scene:
    """Scene overlay: the input scene carrying the planned mirrors."""
    return _dc_replace(scene, mirrors=placement.mirrors)
