"""Mask pipeline: locate mirror regions in an image, rasterize, blend.

Three stages mirror the three switches in :class:`AblationConfig`:

* region identification (quad list per image, from one of three sources),
* mask generation (scanline rasterization of the quad union),
* mask blending (keep pixels under the mask, zero the rest).

With identification disabled but the later stages on, the pipeline sees an
empty region list, produces an all-zero mask and blacks out the whole frame;
with either later stage off the image passes through untouched.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RegionSourceError, ValidationError
from .imgio import ImageBuffer
from .scene import Scene, scene_to_dict


@dataclass(frozen=True)
class QuadRegion:
    """Convex image-space quadrilateral marking one mirror's extent."""

    corners: tuple[tuple[float, float], ...]
    mirror_id: int | None = None

    def __post_init__(self):
        if len(self.corners) != 4:
            raise ValidationError(
                f"quad needs exactly 4 corners, got {list(self.corners)}")
        corners = tuple((float(x), float(y)) for x, y in self.corners)
        # canonical winding: positive shoelace in image coords (y down)
        area2 = 0.0
        for i in range(4):
            x0, y0 = corners[i]
            x1, y1 = corners[(i + 1) % 4]
            area2 += x0 * y1 - x1 * y0
        if area2 < 0:
            corners = tuple(reversed(corners))
            area2 = -area2
        if area2 <= 0:
            raise ValidationError(f"degenerate quad (zero area): {list(self.corners)}")
        for i in range(4):
            ax, ay = corners[i]
            bx, by = corners[(i + 1) % 4]
            cx, cy = corners[(i + 2) % 4]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross < -1e-9 * max(area2, 1.0):
                raise ValidationError(
                    f"quad is not convex at corner {i}: {list(self.corners)}")
        object.__setattr__(self, "corners", corners)

    def area(self) -> float:
        a = 0.0
        for i in range(4):
            x0, y0 = self.corners[i]
            x1, y1 = self.corners[(i + 1) % 4]
            a += x0 * y1 - x1 * y0
        return a / 2.0

    def contains(self, x: float, y: float) -> bool:
        """Same fill rule as the rasterizer (edge-on counts per top-left)."""
        for k in range(4):
            ax, ay = self.corners[k]
            bx, by = self.corners[(k + 1) % 4]
            dx, dy = bx - ax, by - ay
            e = dx * (y - ay) - dy * (x - ax)
            if e > 0:
                continue
            if e == 0 and ((dy == 0 and dx > 0) or dy < 0):
                continue
            return False
        return True


@dataclass(frozen=True)
class MaskRaster:
    """Per-pixel binary mask; 1 marks the indirect-vision area."""

    width: int
    height: int
    bits: np.ndarray  # (height, width) uint8 in {0, 1}

    def __post_init__(self):
        if self.bits.shape != (self.height, self.width):
            raise ValidationError("mask bits do not match declared dimensions")

    def to_image(self) -> ImageBuffer:
        return ImageBuffer(width=self.width, height=self.height, channels=1,
                           pixels=(self.bits * np.uint8(255))[:, :, None])

    @classmethod
    def from_image(cls, img: ImageBuffer) -> "MaskRaster":
        if img.channels != 1:
            raise ValidationError("mask images must be single-channel")
        return cls(width=img.width, height=img.height,
                   bits=(img.pixels[:, :, 0] > 0).astype(np.uint8))

    def popcount(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class AblationConfig:
    ivr_enabled: bool = True
    tmg_enabled: bool = True
    mb_enabled: bool = True


def rasterize_quad(quad: QuadRegion, width: int, height: int,
                   out: np.ndarray | None = None) -> np.ndarray:
    """Pixel-center fill with top-left tie-breaking on boundary centers."""
    if out is None:
        out = np.zeros((height, width), dtype=np.uint8)
    xs = [c[0] for c in quad.corners]
    ys = [c[1] for c in quad.corners]
    x0 = max(0, int(math.floor(min(xs) - 0.5)))
    x1 = min(width, int(math.ceil(max(xs) + 0.5)))
    y0 = max(0, int(math.floor(min(ys) - 0.5)))
    y1 = min(height, int(math.ceil(max(ys) + 0.5)))
    if x0 >= x1 or y0 >= y1:
        return out
    px = np.arange(x0, x1) + 0.5
    py = np.arange(y0, y1) + 0.5
    gx, gy = np.meshgrid(px, py)
    inside = np.ones(gx.shape, dtype=bool)
    for k in range(4):
        ax, ay = quad.corners[k]
        bx, by = quad.corners[(k + 1) % 4]
        dx, dy = bx - ax, by - ay
        e = dx * (gy - ay) - dy * (gx - ax)
        top_left = (dy == 0 and dx > 0) or dy < 0
        inside &= (e >= 0) if top_left else (e > 0)
    out[y0:y1, x0:x1] |= inside.astype(np.uint8)
    return out


def generate_mask(regions, width: int, height: int) -> MaskRaster:
    """Union of rasterized quads; no regions yields the all-zero mask."""
    if width <= 0 or height <= 0:
        raise ValidationError("mask dimensions must be positive")
    bits = np.zeros((height, width), dtype=np.uint8)
    for quad in regions:
        rasterize_quad(quad, width, height, out=bits)
    return MaskRaster(width=width, height=height, bits=bits)


def blend(image: ImageBuffer, mask: MaskRaster) -> ImageBuffer:
    """Keep pixels where the mask is set, zero everything else."""
    if (image.width, image.height) != (mask.width, mask.height):
        raise ValidationError(
            f"image {image.width}x{image.height} does not match "
            f"mask {mask.width}x{mask.height}")
    px = image.pixels * mask.bits[:, :, None]
    return ImageBuffer(width=image.width, height=image.height,
                       channels=image.channels, pixels=px)


# ---------------------------------------------------------------------------
# Region sources


@dataclass(frozen=True)
class RegionSource:
    """Where quads come from: annotation files, scene projection, or an
    external detector's region files (one file per image)."""

    kind: str
    path: Path | None = None
    scene: Scene | None = None

    @classmethod
    def annotation(cls, directory) -> "RegionSource":
        return cls(kind="annotation", path=Path(directory))

    @classmethod
    def projection(cls, scene: Scene) -> "RegionSource":
        return cls(kind="projection", scene=scene)

    @classmethod
    def adapter(cls, directory) -> "RegionSource":
        return cls(kind="adapter", path=Path(directory))

    def fingerprint(self) -> str:
        if self.kind == "projection":
            blob = json.dumps(scene_to_dict(self.scene), sort_keys=True)
            return "projection:" + hashlib.sha256(blob.encode()).hexdigest()
        return f"{self.kind}:{self.path}"


def quads_from_obj(doc) -> list[QuadRegion]:
    quads = []
    for item in doc:
        corners = item.get("corners")
        if corners is None or len(corners) != 4:
            raise ValidationError(f"region entry needs 4 corners: {item!r}")
        quads.append(QuadRegion(
            corners=tuple((float(x), float(y)) for x, y in corners),
            mirror_id=item.get("mirror_id")))
    return quads


def quads_to_obj(quads) -> list[dict]:
    return [{"mirror_id": q.mirror_id, "corners": [list(c) for c in q.corners]}
            for q in quads]


def identify_regions(image_id: str, source: RegionSource) -> list[QuadRegion]:
    """Quad list for one image, per the source variant."""
    if source.kind == "annotation":
        path = source.path / f"{image_id}.json"
        if not path.exists():
            raise RegionSourceError(f"no region annotation for {image_id!r} "
                                    f"(looked at {path})")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad region JSON in {path}: {exc}") from exc
        return quads_from_obj(doc)
    if source.kind == "projection":
        quads = []
        for mirror in source.scene.mirrors:
            q = project_mirror_to_image(source.scene, mirror.id)
            if q is not None:
                quads.append(q)
        return quads
    if source.kind == "adapter":
        path = source.path / f"{image_id}.txt"
        if not path.exists():
            raise RegionSourceError(f"no adapter region file for {image_id!r} "
                                    f"(looked at {path})")
        quads = []
        for ln, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 9:
                raise ValidationError(
                    f"{path}:{ln}: expected 'mirror_id x0 y0 x1 y1 x2 y2 x3 y3'")
            mid = int(parts[0])
            vals = [float(v) for v in parts[1:]]
            quads.append(QuadRegion(
                corners=tuple((vals[2 * i], vals[2 * i + 1]) for i in range(4)),
                mirror_id=mid))
        return quads
    raise ValidationError(f"unknown region source kind {source.kind!r}")


def project_mirror_to_image(scene: Scene, mirror_id: int) -> QuadRegion | None:
    """Pinhole projection of the mirror's four 3D corners.

    Returns None when any corner is at or behind the camera plane.
    """
    mirror = scene.mirror_by_id(mirror_id)
    cam = scene.camera
    cy_, sy_ = math.cos(cam.yaw), math.sin(cam.yaw)
    cp, sp = math.cos(cam.pitch), math.sin(cam.pitch)
    fwd = (cy_ * cp, sy_ * cp, sp)
    right = (sy_, -cy_, 0.0)
    up = (-sp * cy_, -sp * sy_, cp)
    (ax, ay), (bx, by) = mirror.segment
    corners3 = [(ax, ay, mirror.z_bottom), (bx, by, mirror.z_bottom),
                (bx, by, mirror.z_top), (ax, ay, mirror.z_top)]
    pts = []
    for (x, y, z) in corners3:
        d = (x - cam.position[0], y - cam.position[1], z - cam.height)
        zc = d[0] * fwd[0] + d[1] * fwd[1] + d[2] * fwd[2]
        if zc <= 1e-9:
            return None
        xc = d[0] * right[0] + d[1] * right[1] + d[2] * right[2]
        yc = d[0] * up[0] + d[1] * up[1] + d[2] * up[2]
        u = cam.image_w / 2.0 + cam.focal * xc / zc
        v = cam.image_h / 2.0 - cam.focal * yc / zc
        pts.append((u, v))
    try:
        return QuadRegion(corners=tuple(pts), mirror_id=mirror_id)
    except ValidationError:
        return None


# ---------------------------------------------------------------------------
# Pipeline


class MaskCache:
    """Memoizes masks per (source, image, size); a camera installation's
    regions are found once and reused until the source changes."""

    def __init__(self):
        self._masks: dict[tuple, MaskRaster] = {}

    def mask_for(self, source: RegionSource, image_id: str,
                 width: int, height: int) -> MaskRaster:
        key = (source.fingerprint(), image_id, width, height)
        mask = self._masks.get(key)
        if mask is None:
            regions = identify_regions(image_id, source)
            mask = generate_mask(regions, width, height)
            self._masks[key] = mask
        return mask


def run_pipeline(image: ImageBuffer, source: RegionSource,
                 ablation: AblationConfig = AblationConfig(),
                 image_id: str = "", cache: MaskCache | None = None,
                 ) -> tuple[ImageBuffer, MaskRaster | None]:
    """Apply the mask pipeline under the given ablation switches.

    Without mask generation or blending the image passes through unchanged;
    without identification the mask is all-zero and the output all-black.
    """
    if not (ablation.tmg_enabled and ablation.mb_enabled):
        return image, None
    if not ablation.ivr_enabled:
        mask = generate_mask([], image.width, image.height)
    elif cache is not None:
        mask = cache.mask_for(source, image_id, image.width, image.height)
    else:
        regions = identify_regions(image_id, source)
        mask = generate_mask(regions, image.width, image.height)
    return blend(image, mask), mask
