"""World model: floor plan, camera, mirrors, zones.

All lengths are meters, all angles radians. The floor plan is 2D; mirrors
and the camera carry heights only for image-space projection. Values are
immutable after construction and safe to share between threads.

Scene JSON schema (all other modules consume scenes through it)::

    {
      "plan": {
        "boundary":  [[x, y], ...],        counter-clockwise, simple
        "obstacles": [[[x, y], ...], ...]  clockwise, strictly inside
      },
      "camera": {
        "position": [x, y], "yaw": r, "fov": r, "height": m,
        "pitch": r, "focal": px, "image_w": n, "image_h": n
      },
      "mirrors": [
        {"id": n, "segment": [[x, y], [x, y]], "facing": [nx, ny],
         "z_bottom": m, "z_top": m,
         "curvature": {"kind": "flat"}
                   or {"kind": "convex", "radius": r, "facet_count": n}}
      ],
      "zones": [
        {"id": n, "polygon": [[x, y], ...], "kind": "target" | "non_interest"}
      ]
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import point_in_polygon, segment_blocked
from .errors import (InvalidArgumentError, InvalidGeometryError,
                     InvalidSceneError, ValidationError)

Point2 = tuple[float, float]


def _as_point(p) -> Point2:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise ValidationError(f"expected [x, y] point, got {p!r}")
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"non-finite point coordinates: {p!r}")
    return (x, y)


def _float_poly(poly) -> tuple[Point2, ...]:
    return tuple((float(p[0]), float(p[1])) for p in poly)


def polygon_area(poly: tuple[Point2, ...]) -> float:
    """Signed shoelace area; positive for counter-clockwise winding."""
    a = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return a / 2.0


def polygon_centroid(poly: tuple[Point2, ...]) -> Point2:
    a = polygon_area(poly)
    if abs(a) < 1e-12:
        xs = sum(p[0] for p in poly)
        ys = sum(p[1] for p in poly)
        return (xs / len(poly), ys / len(poly))
    cx = cy = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        f = x0 * y1 - x1 * y0
        cx += (x0 + x1) * f
        cy += (y0 + y1) * f
    return (cx / (6.0 * a), cy / (6.0 * a))


def _edges_array(polys) -> np.ndarray:
    """Stack polygon edges into an (M, 4) segment soup."""
    rows = []
    for poly in polys:
        n = len(poly)
        for i in range(n):
            x0, y0 = poly[i]
            x1, y1 = poly[(i + 1) % n]
            rows.append((x0, y0, x1, y1))
    if not rows:
        return np.zeros((0, 4))
    return np.asarray(rows, dtype=np.float64)


def _polygon_simple(poly: tuple[Point2, ...]) -> bool:
    """True if no two non-adjacent edges properly intersect."""
    n = len(poly)
    for i in range(n):
        a0, a1 = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b0, b1 = poly[j], poly[(j + 1) % n]
            blocked = segment_blocked(
                np.array([a0[0]], dtype=np.float64), np.array([a0[1]], dtype=np.float64),
                np.array([a1[0]], dtype=np.float64), np.array([a1[1]], dtype=np.float64),
                np.array([[b0[0], b0[1], b1[0], b1[1]]], dtype=np.float64), 0.0, 1.0)
            if blocked[0]:
                return False
    return True


@dataclass(frozen=True)
class FloorPlan:
    """Simple boundary polygon (CCW) with disjoint obstacle polygons (CW)."""

    boundary: tuple[Point2, ...]
    obstacles: tuple[tuple[Point2, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boundary", _float_poly(self.boundary))
        object.__setattr__(self, "obstacles",
                           tuple(_float_poly(o) for o in self.obstacles))
        if len(self.boundary) < 3:
            raise InvalidGeometryError("boundary needs at least 3 vertices")
        if polygon_area(self.boundary) <= 0:
            raise InvalidGeometryError("boundary must be counter-clockwise")
        if not _polygon_simple(self.boundary):
            raise InvalidGeometryError("boundary is self-intersecting")
        for k, obs in enumerate(self.obstacles):
            if len(obs) < 3:
                raise InvalidGeometryError(f"obstacle {k} needs at least 3 vertices")
            if polygon_area(obs) >= 0:
                raise InvalidGeometryError(f"obstacle {k} must be clockwise")
            if not _polygon_simple(obs):
                raise InvalidGeometryError(f"obstacle {k} is self-intersecting")

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.boundary]
        ys = [p[1] for p in self.boundary]
        return (min(xs), min(ys), max(xs), max(ys))

    def wall_segments(self) -> np.ndarray:
        """Boundary plus obstacle edges as an (M, 4) soup. Cached."""
        cached = getattr(self, "_walls", None)
        if cached is None:
            cached = _edges_array((self.boundary, *self.obstacles))
            object.__setattr__(self, "_walls", cached)
        return cached

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Free-space test for an (N, 2) array; edges count as inside."""
        px = np.ascontiguousarray(pts[:, 0], dtype=np.float64)
        py = np.ascontiguousarray(pts[:, 1], dtype=np.float64)
        bx = np.asarray([p[0] for p in self.boundary])
        by = np.asarray([p[1] for p in self.boundary])
        code = point_in_polygon(px, py, bx, by)
        inside = code >= 1
        for obs in self.obstacles:
            ox = np.asarray([p[0] for p in obs])
            oy = np.asarray([p[1] for p in obs])
            code = point_in_polygon(px, py, ox, oy)
            # obstacle edges belong to free space, the strict interior not
            inside &= ~(code == 1)
        return inside

    def contains_point(self, p: Point2) -> bool:
        return bool(self.contains(np.array([p], dtype=np.float64))[0])


@dataclass(frozen=True)
class Camera:
    position: Point2
    yaw: float
    fov: float
    height: float = 2.5
    pitch: float = 0.0
    focal: float = 400.0
    image_w: int = 640
    image_h: int = 480

    def __post_init__(self):
        object.__setattr__(self, "position",
                           (float(self.position[0]), float(self.position[1])))
        if not 0.0 < self.fov <= 2.0 * math.pi + 1e-12:
            raise ValidationError(f"fov must be in (0, 2*pi], got {self.fov}")
        if self.focal <= 0 or self.image_w <= 0 or self.image_h <= 0:
            raise ValidationError("focal and image dimensions must be positive")


@dataclass(frozen=True)
class Curvature:
    """Flat mirror, or a convex circular arc approximated by planar facets."""

    kind: str = "flat"
    radius: float = 0.0
    facet_count: int = 1

    def __post_init__(self):
        if self.kind not in ("flat", "convex"):
            raise ValidationError(f"unknown curvature kind {self.kind!r}")
        if self.kind == "convex":
            if self.radius <= 0:
                raise ValidationError("convex curvature requires radius > 0")
            if self.facet_count < 1:
                raise ValidationError("facet_count must be >= 1")


FLAT = Curvature("flat")


@dataclass(frozen=True)
class Facet:
    """One planar reflecting element: a segment plus its reflective-side normal."""

    a: Point2
    b: Point2
    normal: Point2


@dataclass(frozen=True)
class Mirror:
    id: int
    segment: tuple[Point2, Point2]
    facing: Point2
    z_bottom: float = 1.0
    z_top: float = 2.0
    curvature: Curvature = FLAT

    def __post_init__(self):
        object.__setattr__(self, "segment",
                           tuple(_float_poly(self.segment)))
        object.__setattr__(self, "facing",
                           (float(self.facing[0]), float(self.facing[1])))
        (ax, ay), (bx, by) = self.segment
        length = math.hypot(bx - ax, by - ay)
        if length <= 0:
            raise InvalidGeometryError(f"mirror {self.id}: zero-length segment")
        if self.z_top <= self.z_bottom:
            raise ValidationError(f"mirror {self.id}: z_top must exceed z_bottom")
        fx, fy = self.facing
        fn = math.hypot(fx, fy)
        if fn == 0:
            raise InvalidGeometryError(f"mirror {self.id}: zero facing vector")
        # snap facing to the exact segment normal on the requested side
        nx, ny = (by - ay) / length, -(bx - ax) / length
        side = fx * nx + fy * ny
        if abs(side) < 1e-9:
            raise InvalidGeometryError(
                f"mirror {self.id}: facing is parallel to the segment")
        if side < 0:
            nx, ny = -nx, -ny
        object.__setattr__(self, "facing", (nx, ny))
        if self.curvature.kind == "convex" and self.curvature.radius <= length / 2:
            raise ValidationError(
                f"mirror {self.id}: convex radius must exceed half the segment length")

    @property
    def length(self) -> float:
        (ax, ay), (bx, by) = self.segment
        return math.hypot(bx - ax, by - ay)

    def facets(self) -> tuple[Facet, ...]:
        """Planar facets; a flat mirror is its own single facet."""
        (ax, ay), (bx, by) = self.segment
        if self.curvature.kind == "flat" or self.curvature.facet_count == 1:
            return (Facet((ax, ay), (bx, by), self.facing),)
        r = self.curvature.radius
        k = self.curvature.facet_count
        mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
        half = self.length / 2.0
        h = math.sqrt(r * r - half * half)
        # arc center sits behind the chord so the bulge faces the reflective side
        ox, oy = mx - self.facing[0] * h, my - self.facing[1] * h
        a0 = math.atan2(ay - oy, ax - ox)
        a1 = math.atan2(by - oy, bx - ox)
        sweep = math.remainder(a1 - a0, 2.0 * math.pi)
        pts = [(ox + r * math.cos(a0 + sweep * j / k),
                oy + r * math.sin(a0 + sweep * j / k)) for j in range(k + 1)]
        facets = []
        for j in range(k):
            p, q = pts[j], pts[j + 1]
            cx, cy = (p[0] + q[0]) / 2.0 - ox, (p[1] + q[1]) / 2.0 - oy
            cn = math.hypot(cx, cy)
            facets.append(Facet(p, q, (cx / cn, cy / cn)))
        return tuple(facets)


@dataclass(frozen=True)
class Zone:
    id: int
    polygon: tuple[Point2, ...]
    kind: str = "target"

    def __post_init__(self):
        object.__setattr__(self, "polygon", _float_poly(self.polygon))
        if self.kind not in ("target", "non_interest"):
            raise ValidationError(f"zone {self.id}: unknown kind {self.kind!r}")
        if len(self.polygon) < 3:
            raise InvalidGeometryError(f"zone {self.id}: polygon needs 3+ vertices")
        if abs(polygon_area(self.polygon)) <= 0:
            raise InvalidGeometryError(f"zone {self.id}: degenerate polygon")

    def marker(self) -> Point2:
        """Representative point used for the covered-markers report."""
        return polygon_centroid(self.polygon)


@dataclass(frozen=True)
class Scene:
    plan: FloorPlan
    camera: Camera
    mirrors: tuple[Mirror, ...] = ()
    zones: tuple[Zone, ...] = ()

    def __post_init__(self):
        if not self.plan.contains_point(self.camera.position):
            raise InvalidSceneError("camera position is outside free space")
        ids = [m.id for m in self.mirrors]
        if len(set(ids)) != len(ids):
            raise InvalidSceneError(f"duplicate mirror ids: {ids}")
        zids = [z.id for z in self.zones]
        if len(set(zids)) != len(zids):
            raise InvalidSceneError(f"duplicate zone ids: {zids}")
        for m in self.mirrors:
            for f in m.facets():
                for p in (f.a, f.b):
                    if not self.plan.contains_point(p):
                        raise InvalidSceneError(
                            f"mirror {m.id}: footprint leaves free space at {p}")
        for z in self.zones:
            for p in z.polygon:
                if not self.plan.contains_point(p):
                    raise InvalidSceneError(
                        f"zone {z.id}: vertex {p} outside the boundary")

    def target_zones(self) -> tuple[Zone, ...]:
        return tuple(z for z in self.zones if z.kind == "target")

    def non_interest_zones(self) -> tuple[Zone, ...]:
        return tuple(z for z in self.zones if z.kind == "non_interest")

    def mirror_by_id(self, mirror_id: int) -> Mirror:
        for m in self.mirrors:
            if m.id == mirror_id:
                return m
        raise InvalidArgumentError(f"no mirror with id {mirror_id}")

    def without_mirrors(self) -> "Scene":
        return replace(self, mirrors=())


# ---------------------------------------------------------------------------
# JSON serialization


def _curvature_to_json(c: Curvature) -> dict:
    if c.kind == "flat":
        return {"kind": "flat"}
    return {"kind": "convex", "radius": c.radius, "facet_count": c.facet_count}


def scene_to_dict(scene: Scene) -> dict:
    cam = scene.camera
    return {
        "plan": {
            "boundary": [list(p) for p in scene.plan.boundary],
            "obstacles": [[list(p) for p in obs] for obs in scene.plan.obstacles],
        },
        "camera": {
            "position": list(cam.position), "yaw": cam.yaw, "fov": cam.fov,
            "height": cam.height, "pitch": cam.pitch, "focal": cam.focal,
            "image_w": cam.image_w, "image_h": cam.image_h,
        },
        "mirrors": [
            {"id": m.id, "segment": [list(m.segment[0]), list(m.segment[1])],
             "facing": list(m.facing), "z_bottom": m.z_bottom, "z_top": m.z_top,
             "curvature": _curvature_to_json(m.curvature)}
            for m in scene.mirrors
        ],
        "zones": [
            {"id": z.id, "polygon": [list(p) for p in z.polygon], "kind": z.kind}
            for z in scene.zones
        ],
    }


def scene_from_dict(doc: dict) -> Scene:
    try:
        plan_doc = doc["plan"]
        cam_doc = doc["camera"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"scene document missing section: {exc}") from exc
    plan = FloorPlan(
        boundary=tuple(_as_point(p) for p in plan_doc["boundary"]),
        obstacles=tuple(tuple(_as_point(p) for p in obs)
                        for obs in plan_doc.get("obstacles", [])),
    )
    camera = Camera(
        position=_as_point(cam_doc["position"]),
        yaw=float(cam_doc["yaw"]),
        fov=float(cam_doc["fov"]),
        height=float(cam_doc.get("height", 2.5)),
        pitch=float(cam_doc.get("pitch", 0.0)),
        focal=float(cam_doc.get("focal", 400.0)),
        image_w=int(cam_doc.get("image_w", 640)),
        image_h=int(cam_doc.get("image_h", 480)),
    )
    mirrors = []
    for mdoc in doc.get("mirrors", []):
        cdoc = mdoc.get("curvature", {"kind": "flat"})
        if cdoc.get("kind", "flat") == "flat":
            curv = FLAT
        else:
            curv = Curvature("convex", radius=float(cdoc["radius"]),
                             facet_count=int(cdoc.get("facet_count", 8)))
        mirrors.append(Mirror(
            id=int(mdoc["id"]),
            segment=(_as_point(mdoc["segment"][0]), _as_point(mdoc["segment"][1])),
            facing=_as_point(mdoc["facing"]),
            z_bottom=float(mdoc.get("z_bottom", 1.0)),
            z_top=float(mdoc.get("z_top", 2.0)),
            curvature=curv,
        ))
    zones = []
    for zdoc in doc.get("zones", []):
        zones.append(Zone(
            id=int(zdoc["id"]),
            polygon=tuple(_as_point(p) for p in zdoc["polygon"]),
            kind=zdoc.get("kind", "target"),
        ))
    return Scene(plan=plan, camera=camera, mirrors=tuple(mirrors), zones=tuple(zones))


def scene_to_json(scene: Scene, indent: int | None = 2) -> str:
    return json.dumps(scene_to_dict(scene), indent=indent)


def scene_from_json(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid scene JSON: {exc}") from exc
    return scene_from_dict(doc)


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_json(fh.read())


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene_to_json(scene))
        fh.write("\n")
