"""Synthetic desk-scale experiment harness.

Builds an irregular room with four target zones (two occluded from the
camera), one non-interest zone, and four mirrors aimed so every target is
seen indirectly with zero leakage. From that scene it renders a flat-shaded
image dataset with fire ground truth inside the mirror quads and flag noise
in the non-interest band, runs a seeded oracle detector over it, and
compares evaluation with and without mask filtering.

Everything is a pure function of the seeds: images, ground truth,
detections and reports are byte-stable across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .deteval import BBox, Detection, GroundTruthBox, evaluate, filter_detections
from .errors import InvalidArgumentError
from .imgio import ImageBuffer
from .maskpipe import QuadRegion, generate_mask, project_mirror_to_image
from .planner import MountSegment
from .scene import Camera, FloorPlan, Mirror, Point2, Scene, Zone

FIRE_CLASS = 0


def _unit(v):
    n = math.hypot(v[0], v[1])
    return (v[0] / n, v[1] / n)


def _aimed_mirror(mirror_id: int, camera_pos: Point2, center: Point2,
                  target: Point2, length: float, z_bottom: float = 1.2,
                  z_top: float = 2.4) -> Mirror:
    """Flat mirror at ``center`` angled so the camera's reflection looks at
    ``target``: the facing normal bisects the in/out directions."""
    d_in = _unit((center[0] - camera_pos[0], center[1] - camera_pos[1]))
    d_out = _unit((target[0] - center[0], target[1] - center[1]))
    facing = _unit((d_out[0] - d_in[0], d_out[1] - d_in[1]))
    perp = (-facing[1], facing[0])
    half = length / 2.0
    seg = ((center[0] - perp[0] * half, center[1] - perp[1] * half),
           (center[0] + perp[0] * half, center[1] + perp[1] * half))
    return Mirror(id=mirror_id, segment=seg, facing=facing,
                  z_bottom=z_bottom, z_top=z_top)


def synth_scene(seed: int = 0) -> Scene:
    """Occlusion-scenario analogue: 4 target zones, 2 hidden from the camera,
    1 non-interest zone, 4 mirrors aimed one-per-target with zero leakage.

    The seed jitters zone positions slightly; mirrors are re-aimed after the
    jitter so the construction invariants hold for any seed.
    """
    rng = np.random.default_rng([seed, 0xA11])
    j = lambda: float(rng.uniform(-0.03, 0.03))

    boundary = ((0, 0), (12, 0), (12, 8), (5, 8), (5, 12), (0, 12))
    pillar = ((6.0, 6.2), (6.0, 7.2), (7.0, 7.2), (7.0, 6.2))
    plan = FloorPlan(boundary=boundary, obstacles=(pillar,))
    camera = Camera(position=(11.0, 1.2), yaw=math.radians(148.0),
                    fov=math.radians(80.0), height=2.8, pitch=-0.06,
                    focal=380.0, image_w=640, image_h=480)

    def box(cx, cy, hw, hh):
        return ((cx - hw, cy - hh), (cx + hw, cy - hh),
                (cx + hw, cy + hh), (cx - hw, cy + hh))

    z1c = (8.5 + j(), 4.5 + j())    # hall, directly visible
    z2c = (2.5 + j(), 2.5 + j())    # hall, directly visible
    z3c = (4.2 + j(), 10.4 + j())   # arm pocket, occluded
    z4c = (3.0 + j(), 11.5 + j())   # arm pocket, occluded
    zones = (
        Zone(id=1, polygon=box(*z1c, 0.5, 0.5), kind="target"),
        Zone(id=2, polygon=box(*z2c, 0.5, 0.5), kind="target"),
        Zone(id=3, polygon=box(*z3c, 0.4, 0.4), kind="target"),
        Zone(id=4, polygon=box(*z4c, 0.4, 0.3), kind="target"),
        Zone(id=5, polygon=box(1.8, 0.6, 0.8, 0.4), kind="non_interest"),
    )
    cam_pos = camera.position
    mirrors = (
        _aimed_mirror(1, cam_pos, (8.5, 7.5), z1c, 1.0),
        _aimed_mirror(2, cam_pos, (0.5, 5.5), z2c, 0.8),
        _aimed_mirror(3, cam_pos, (3.5, 7.6), z3c, 1.5),
        _aimed_mirror(4, cam_pos, (2.2, 7.5), z4c, 1.4),
    )
    return Scene(plan=plan, camera=camera, mirrors=mirrors, zones=zones)


def benchmark_scene() -> Scene:
    """L-shaped planner benchmark: one visible target, one occluded pocket."""
    plan = FloorPlan(boundary=((0, 0), (6, 0), (6, 4), (3, 4), (3, 7), (0, 7)))
    camera = Camera(position=(5.2, 1.0), yaw=math.pi / 2, fov=2 * math.pi)
    zones = (
        Zone(id=1, polygon=((1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)),
             kind="target"),
        Zone(id=2, polygon=((2.0, 5.6), (2.8, 5.6), (2.8, 6.3), (2.0, 6.3)),
             kind="target"),
        Zone(id=3, polygon=((0.2, 4.1), (1.2, 4.1), (1.2, 4.6), (0.2, 4.6)),
             kind="non_interest"),
    )
    return Scene(plan=plan, camera=camera, zones=zones)


def benchmark_mounts() -> list[MountSegment]:
    return [
        MountSegment(segment=((0.0, 4.8), (0.0, 6.8)), allowed_yaw=(-0.9, 0.9)),
        MountSegment(segment=((3.2, 4.0), (5.8, 4.0)),
                     allowed_yaw=(-math.pi / 2 - 0.9, -math.pi / 2 + 0.9)),
    ]


# ---------------------------------------------------------------------------
# Dataset synthesis


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    num_images: int = 800
    image_w: int = 640
    image_h: int = 480
    fire_count_range: tuple[int, int] = (1, 2)
    noise_fp_rate: float = 0.9
    noise_region: int = 5
    jitter: float = 1.5
    miss_rate: float = 0.03
    noise_image_fraction: float = 0.125
    flags_per_noise_image: int = 2
    split_fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)

    def __post_init__(self):
        for name in ("noise_fp_rate", "miss_rate", "noise_image_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {v}")
        lo, hi = self.fire_count_range
        if lo > hi or lo < 0:
            raise InvalidArgumentError("fire_count_range must satisfy 0 <= min <= max")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed, "num_images": self.num_images,
            "image_w": self.image_w, "image_h": self.image_h,
            "fire_count_range": list(self.fire_count_range),
            "noise_fp_rate": self.noise_fp_rate,
            "noise_region": self.noise_region, "jitter": self.jitter,
            "miss_rate": self.miss_rate,
            "noise_image_fraction": self.noise_image_fraction,
            "flags_per_noise_image": self.flags_per_noise_image,
            "split_fractions": list(self.split_fractions),
        }


@dataclass(frozen=True)
class FireSpec:
    cx: float
    cy: float
    rx: float
    ry: float


@dataclass(frozen=True)
class FlagSpec:
    x0: float
    y0: float
    x1: float
    y1: float

    def emblem(self) -> BBox:
        w = self.x1 - self.x0
        h = self.y1 - self.y0
        return BBox(self.x0 + 0.25 * w, self.y0 + 0.25 * h,
                    self.x1 - 0.25 * w, self.y1 - 0.25 * h)


@dataclass(frozen=True)
class ImagePlan:
    image_id: str
    fires: tuple[FireSpec, ...]
    flags: tuple[FlagSpec, ...]


class LazyImages:
    """Indexable sequence of rendered frames; nothing is kept in memory."""

    def __init__(self, dataset: "SynthDataset"):
        self._ds = dataset

    def __len__(self):
        return len(self._ds.plans)

    def __getitem__(self, i) -> ImageBuffer:
        return render_image(self._ds.plans[i], self._ds.quads, self._ds.config)


@dataclass(frozen=True)
class SynthDataset:
    scene: Scene
    config: SynthConfig
    quads: tuple[QuadRegion, ...]          # fixed camera => same quads per image
    plans: tuple[ImagePlan, ...]
    gts: tuple[GroundTruthBox, ...]
    split: dict[str, str]                  # image_id -> train | val | test
    noise_band: tuple[float, float, float, float]  # projected non-interest bbox

    @property
    def images(self) -> LazyImages:
        return LazyImages(self)

    def regions(self, image_id: str) -> list[QuadRegion]:
        return list(self.quads)

    def image_ids(self) -> list[str]:
        return [p.image_id for p in self.plans]


def _project_zone_band(scene: Scene, zone_id: int,
                       z_lo: float = 1.3, z_hi: float = 2.1):
    """Image bbox of a floor zone extruded to flag height."""
    zone = next(z for z in scene.zones if z.id == zone_id)
    cam = scene.camera
    cy_, sy_ = math.cos(cam.yaw), math.sin(cam.yaw)
    cp, sp = math.cos(cam.pitch), math.sin(cam.pitch)
    fwd = (cy_ * cp, sy_ * cp, sp)
    right = (sy_, -cy_, 0.0)
    up = (-sp * cy_, -sp * sy_, cp)
    us, vs = [], []
    for (x, y) in zone.polygon:
        for z in (z_lo, z_hi):
            d = (x - cam.position[0], y - cam.position[1], z - cam.height)
            zc = d[0] * fwd[0] + d[1] * fwd[1] + d[2] * fwd[2]
            if zc <= 1e-9:
                continue
            xc = d[0] * right[0] + d[1] * right[1] + d[2] * right[2]
            yc = d[0] * up[0] + d[1] * up[1] + d[2] * up[2]
            us.append(cam.image_w / 2.0 + cam.focal * xc / zc)
            vs.append(cam.image_h / 2.0 - cam.focal * yc / zc)
    if not us:
        raise InvalidArgumentError(f"noise zone {zone_id} does not project")
    return (max(0.0, min(us)), max(0.0, min(vs)),
            min(float(scene.camera.image_w), max(us)),
            min(float(scene.camera.image_h), max(vs)))


def _quad_inner_box(quad: QuadRegion, margin: float):
    xs = [c[0] for c in quad.corners]
    ys = [c[1] for c in quad.corners]
    return (min(xs) + margin, min(ys) + margin,
            max(xs) - margin, max(ys) - margin)


def _fire_inside_quad(rng, quad: QuadRegion) -> FireSpec | None:
    x0, y0, x1, y1 = _quad_inner_box(quad, margin=6.0)
    if x1 - x0 < 8 or y1 - y0 < 8:
        return None
    for _ in range(50):
        cx = float(rng.uniform(x0, x1))
        cy = float(rng.uniform(y0, y1))
        rx = float(rng.uniform(5.0, min(16.0, (x1 - x0) / 2)))
        ry = float(rng.uniform(5.0, min(16.0, (y1 - y0) / 2)))
        corners = [(cx - rx, cy - ry), (cx + rx, cy - ry),
                   (cx + rx, cy + ry), (cx - rx, cy + ry)]
        if all(quad.contains(px, py) for px, py in corners):
            return FireSpec(cx=cx, cy=cy, rx=rx, ry=ry)
    return None


def synth_dataset(scene: Scene, config: SynthConfig) -> SynthDataset:
    """Render plans, ground truth and split for the whole image set."""
    if not scene.mirrors:
        raise InvalidArgumentError("dataset synthesis needs a scene with mirrors")
    cam = scene.camera
    if (config.image_w, config.image_h) != (cam.image_w, cam.image_h):
        # render target overrides the camera sensor; keep the field of view
        from dataclasses import replace as _dc_replace
        scale = config.image_w / cam.image_w
        scene = _dc_replace(scene, camera=_dc_replace(
            cam, image_w=config.image_w, image_h=config.image_h,
            focal=cam.focal * scale))
    rng = np.random.default_rng([config.seed, 0xD5])
    quads = []
    for m in scene.mirrors:
        q = project_mirror_to_image(scene, m.id)
        if q is not None:
            quads.append(q)
    if not quads:
        raise InvalidArgumentError("no mirror projects into the camera frame")
    band = _project_zone_band(scene, config.noise_region)

    n = config.num_images
    n_noise = round(config.noise_image_fraction * n)
    noise_set = set(map(int, rng.choice(n, size=n_noise, replace=False)))

    plans: list[ImagePlan] = []
    gts: list[GroundTruthBox] = []
    lo, hi = config.fire_count_range
    for i in range(n):
        image_id = f"img_{i:04d}"
        fires = []
        k = int(rng.integers(lo, hi + 1)) if hi > lo else lo
        for _ in range(k):
            quad = quads[int(rng.integers(len(quads)))]
            fire = _fire_inside_quad(rng, quad)
            if fire is None:
                continue
            fires.append(fire)
            gts.append(GroundTruthBox(
                image_id=image_id, class_id=FIRE_CLASS,
                bbox=BBox(fire.cx - fire.rx, fire.cy - fire.ry,
                          fire.cx + fire.rx, fire.cy + fire.ry)))
        flags = []
        if i in noise_set:
            bx0, by0, bx1, by1 = band
            for _ in range(config.flags_per_noise_image):
                fw = float(rng.uniform(18.0, 30.0))
                fh = float(rng.uniform(12.0, 20.0))
                fx = float(rng.uniform(bx0, max(bx0 + 1.0, bx1 - fw)))
                fy = float(rng.uniform(by0, max(by0 + 1.0, by1 - fh)))
                flags.append(FlagSpec(x0=fx, y0=fy, x1=fx + fw, y1=fy + fh))
        plans.append(ImagePlan(image_id=image_id, fires=tuple(fires),
                               flags=tuple(flags)))

    order = rng.permutation(n)
    f_train, f_val, _ = config.split_fractions
    n_train = round(f_train * n)
    n_val = round(f_val * n)
    split = {}
    for rank, idx in enumerate(order):
        name = ("train" if rank < n_train
                else "val" if rank < n_train + n_val else "test")
        split[f"img_{int(idx):04d}"] = name
    return SynthDataset(scene=scene, config=config, quads=tuple(quads),
                        plans=tuple(plans), gts=tuple(gts), split=split,
                        noise_band=band)


# flat-shaded palette
_BG = (44, 46, 50)
_MIRROR_FILL = (168, 186, 205)
_MIRROR_EDGE = (96, 116, 140)
_FIRE_OUTER = (228, 88, 28)
_FIRE_CORE = (252, 196, 72)
_FLAG_CLOTH = (238, 238, 238)
_FLAG_EMBLEM = (196, 40, 36)


def _fill_ellipse(px, cx, cy, rx, ry, color):
    h, w, _ = px.shape
    x0, x1 = max(0, int(cx - rx - 1)), min(w, int(cx + rx + 2))
    y0, y1 = max(0, int(cy - ry - 1)), min(h, int(cy + ry + 2))
    if x0 >= x1 or y0 >= y1:
        return
    gx, gy = np.meshgrid(np.arange(x0, x1) + 0.5, np.arange(y0, y1) + 0.5)
    inside = ((gx - cx) / rx) ** 2 + ((gy - cy) / ry) ** 2 <= 1.0
    px[y0:y1, x0:x1][inside] = color


def _fill_rect(px, x0, y0, x1, y1, color):
    h, w, _ = px.shape
    xa, xb = max(0, int(round(x0))), min(w, int(round(x1)))
    ya, yb = max(0, int(round(y0))), min(h, int(round(y1)))
    if xa < xb and ya < yb:
        px[ya:yb, xa:xb] = color


def render_image(plan: ImagePlan, quads, config: SynthConfig) -> ImageBuffer:
    """Flat-shaded frame: mirror panels, fire blobs, optional flag noise."""
    px = np.empty((config.image_h, config.image_w, 3), dtype=np.uint8)
    px[:] = _BG
    from .maskpipe import rasterize_quad
    for quad in quads:
        m = rasterize_quad(quad, config.image_w, config.image_h)
        px[m.astype(bool)] = _MIRROR_FILL
    for flag in plan.flags:
        _fill_rect(px, flag.x0, flag.y0, flag.x1, flag.y1, _FLAG_CLOTH)
        emblem = flag.emblem()
        _fill_ellipse(px, (emblem.x_min + emblem.x_max) / 2,
                      (emblem.y_min + emblem.y_max) / 2,
                      (emblem.x_max - emblem.x_min) / 2,
                      (emblem.y_max - emblem.y_min) / 2, _FLAG_EMBLEM)
    for fire in plan.fires:
        _fill_ellipse(px, fire.cx, fire.cy, fire.rx, fire.ry, _FIRE_OUTER)
        _fill_ellipse(px, fire.cx, fire.cy + 0.25 * fire.ry,
                      0.55 * fire.rx, 0.55 * fire.ry, _FIRE_CORE)
    return ImageBuffer(width=config.image_w, height=config.image_h, channels=3,
                       pixels=px)


# ---------------------------------------------------------------------------
# Oracle detector and experiment


def oracle_detector(dataset: SynthDataset, config: SynthConfig) -> list[Detection]:
    """Ground-truth-derived detections with seeded misses, jitter and the
    flag-pattern false positives, standing in for a trained detector."""
    rng = np.random.default_rng([config.seed, 0xDE7])
    dets: list[Detection] = []
    gts_by_image: dict[str, list[GroundTruthBox]] = {}
    for g in dataset.gts:
        gts_by_image.setdefault(g.image_id, []).append(g)
    for plan in dataset.plans:
        for g in gts_by_image.get(plan.image_id, ()):  # creation order
            missed = rng.random() < config.miss_rate
            jit = rng.uniform(-config.jitter, config.jitter, size=4)
            conf = float(rng.uniform(0.55, 0.99))
            if missed:
                continue
            b = g.bbox
            x0, y0 = b.x_min + jit[0], b.y_min + jit[1]
            x1, y1 = b.x_max + jit[2], b.y_max + jit[3]
            if x1 - x0 < 1.0 or y1 - y0 < 1.0:
                continue
            dets.append(Detection(image_id=plan.image_id, class_id=FIRE_CLASS,
                                  bbox=BBox(x0, y0, x1, y1), confidence=conf))
        for flag in plan.flags:
            fire_like = rng.random() < config.noise_fp_rate
            conf = float(rng.uniform(0.3, 0.9))
            if not fire_like:
                continue
            e = flag.emblem()
            dets.append(Detection(image_id=plan.image_id, class_id=FIRE_CLASS,
                                  bbox=e, confidence=conf))
    return dets


def _count_in_band(dets, band) -> int:
    x0, y0, x1, y1 = band
    n = 0
    for d in dets:
        cx = (d.bbox.x_min + d.bbox.x_max) / 2
        cy = (d.bbox.y_min + d.bbox.y_max) / 2
        if x0 <= cx <= x1 and y0 <= cy <= y1:
            n += 1
    return n


REFERENCE_ROWS = [
    {"model": "direct detector (published reference)", "precision_pct": 87.1,
     "map50_pct": 87.9, "reproducible": False},
    {"model": "mask-filtered detector (published reference)",
     "precision_pct": 93.8, "map50_pct": 91.6, "reproducible": False},
]


def run_experiment(scene: Scene, config: SynthConfig, min_inside: float = 0.5,
                   dataset: SynthDataset | None = None,
                   dets: list[Detection] | None = None) -> dict:
    """Baseline-vs-masked comparison over a freshly synthesized dataset.

    The mask is the rasterized union of the projected mirror quads; the
    masked run drops every detection with less than ``min_inside`` of its box
    under the mask. Pass ``dataset``/``dets`` to reuse earlier outputs.
    """
    if dataset is None:
        dataset = synth_dataset(scene, config)
    if dets is None:
        dets = oracle_detector(dataset, config)
    mask = generate_mask(dataset.quads, config.image_w, config.image_h)
    masked_dets = filter_detections(dets, mask, min_inside)
    gts = list(dataset.gts)
    baseline = evaluate(dets, gts)
    masked = evaluate(masked_dets, gts)
    report = {
        "config": config.to_dict(),
        "num_detections": {"baseline": len(dets), "masked": len(masked_dets)},
        "noise_zone_detections": {
            "baseline": _count_in_band(dets, dataset.noise_band),
            "masked": _count_in_band(masked_dets, dataset.noise_band),
        },
        "baseline": baseline.to_dict(),
        "masked": masked.to_dict(),
        "reference_reported": {
            "note": ("published reference rows from the real mirror "
                     "deployment with a trained detector; directional "
                     "context only, not reproducible by this synthetic run"),
            "rows": REFERENCE_ROWS,
        },
    }
    return report


def format_comparison(report: dict) -> str:
    """Side-by-side table over precision and mAP50 columns."""
    rows = [
        ("oracle detector (baseline)", 100 * report["baseline"]["precision"],
         100 * report["baseline"]["map50"]),
        ("oracle detector + mask filter", 100 * report["masked"]["precision"],
         100 * report["masked"]["map50"]),
    ]
    for ref in report["reference_reported"]["rows"]:
        rows.append((ref["model"], ref["precision_pct"], ref["map50_pct"]))
    width = max(len(r[0]) for r in rows)
    lines = [f"{'Model':<{width}}  P(%)   mAP50(%)"]
    for name, p, m in rows:
        lines.append(f"{name:<{width}}  {p:5.1f}  {m:7.1f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# On-disk dataset layout


def save_dataset(dataset: SynthDataset, out_dir, write_images: bool = True) -> None:
    """images/ (PPM), masks/ (PGM), regions/ (JSON), gt.jsonl, split.json."""
    from pathlib import Path

    from .deteval import save_ground_truth
    from .imgio import write_netpbm
    from .maskpipe import quads_to_obj
    from .scene import save_scene

    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(exist_ok=True)
    (out / "regions").mkdir(exist_ok=True)
    save_scene(dataset.scene, out / "scene.json")
    mask = generate_mask(dataset.quads, dataset.config.image_w,
                         dataset.config.image_h)
    region_obj = quads_to_obj(dataset.quads)
    for i, plan in enumerate(dataset.plans):
        if write_images:
            write_netpbm(dataset.images[i], out / "images" / f"{plan.image_id}.ppm")
            write_netpbm(mask.to_image(), out / "masks" / f"{plan.image_id}.pgm")
        (out / "regions" / f"{plan.image_id}.json").write_text(
            json.dumps(region_obj), encoding="utf-8")
    save_ground_truth(dataset.gts, out / "gt.jsonl")
    groups = {"train": [], "val": [], "test": []}
    for image_id in sorted(dataset.split):
        groups[dataset.split[image_id]].append(image_id)
    (out / "split.json").write_text(json.dumps(groups, indent=2),
                                    encoding="utf-8")
