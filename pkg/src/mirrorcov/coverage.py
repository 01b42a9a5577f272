"""Coverage grids over free space and per-mirror alignment reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import point_in_polygon
from .errors import InvalidArgumentError
from .geometry import direct_visible_mask, mirror_visible_mask
from .scene import Point2, Scene, Zone

DEFAULT_CELL_SIZE = 0.1


@dataclass(frozen=True)
class CoverageGrid:
    """Per-cell visibility labels over the plan's bounding box.

    Arrays are (ny, nx), row y index 0 at the bbox bottom. ``indirect`` has
    one layer per mirror, ordered like ``mirror_ids``. Cells outside free
    space carry no labels; "uncovered" is derived, never stored.
    """

    cell_size: float
    origin: Point2
    nx: int
    ny: int
    mirror_ids: tuple[int, ...]
    free: np.ndarray
    direct: np.ndarray
    indirect: np.ndarray

    def centers(self) -> np.ndarray:
        xs = self.origin[0] + (np.arange(self.nx) + 0.5) * self.cell_size
        ys = self.origin[1] + (np.arange(self.ny) + 0.5) * self.cell_size
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx.ravel(), gy.ravel()], axis=1)

    def covered(self) -> np.ndarray:
        cov = self.direct.copy()
        if len(self.mirror_ids):
            cov |= self.indirect.any(axis=0)
        return cov & self.free

    def uncovered(self) -> np.ndarray:
        return self.free & ~self.covered()

    def cell_of(self, p: Point2) -> tuple[int, int]:
        ix = int((p[0] - self.origin[0]) / self.cell_size)
        iy = int((p[1] - self.origin[1]) / self.cell_size)
        return (min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1))

    def point_covered(self, p: Point2) -> bool:
        ix, iy = self.cell_of(p)
        return bool(self.covered()[iy, ix])

    def zone_cell_mask(self, zone: Zone) -> np.ndarray:
        pts = self.centers()
        vx = np.asarray([v[0] for v in zone.polygon])
        vy = np.asarray([v[1] for v in zone.polygon])
        inside = point_in_polygon(
            np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]),
            vx, vy) >= 1
        return inside.reshape(self.ny, self.nx) & self.free


def _rows_to_strings(mask: np.ndarray) -> list[str]:
    return ["".join("1" if v else "0" for v in row) for row in mask]


def _rows_from_strings(rows: list[str]) -> np.ndarray:
    return np.asarray([[c == "1" for c in row] for row in rows], dtype=bool)


def grid_to_dict(grid: CoverageGrid) -> dict:
    return {
        "cell_size": grid.cell_size,
        "origin": list(grid.origin),
        "nx": grid.nx,
        "ny": grid.ny,
        "mirror_ids": list(grid.mirror_ids),
        "free": _rows_to_strings(grid.free),
        "direct": _rows_to_strings(grid.direct),
        "indirect": {str(mid): _rows_to_strings(grid.indirect[k])
                     for k, mid in enumerate(grid.mirror_ids)},
    }


def grid_from_dict(doc: dict) -> CoverageGrid:
    mirror_ids = tuple(doc["mirror_ids"])
    free = _rows_from_strings(doc["free"])
    ny, nx = free.shape
    indirect = np.zeros((len(mirror_ids), ny, nx), dtype=bool)
    for k, mid in enumerate(mirror_ids):
        indirect[k] = _rows_from_strings(doc["indirect"][str(mid)])
    return CoverageGrid(
        cell_size=float(doc["cell_size"]), origin=tuple(doc["origin"]),
        nx=nx, ny=ny, mirror_ids=mirror_ids, free=free,
        direct=_rows_from_strings(doc["direct"]), indirect=indirect)


def coverage_map(scene: Scene, cell_size: float = DEFAULT_CELL_SIZE) -> CoverageGrid:
    """Label every free-space cell center: direct / indirect(mirror) / uncovered."""
    if cell_size <= 0:
        raise InvalidArgumentError(f"cell_size must be positive, got {cell_size}")
    x0, y0, x1, y1 = scene.plan.bbox()
    if cell_size > max(x1 - x0, y1 - y0):
        raise InvalidArgumentError(
            f"cell_size {cell_size} exceeds the scene extent "
            f"{max(x1 - x0, y1 - y0):.3f}")
    nx = max(1, math.ceil((x1 - x0) / cell_size - 1e-9))
    ny = max(1, math.ceil((y1 - y0) / cell_size - 1e-9))
    grid = CoverageGrid(
        cell_size=cell_size, origin=(x0, y0), nx=nx, ny=ny,
        mirror_ids=tuple(m.id for m in scene.mirrors),
        free=np.zeros((ny, nx), dtype=bool),
        direct=np.zeros((ny, nx), dtype=bool),
        indirect=np.zeros((len(scene.mirrors), ny, nx), dtype=bool))
    pts = grid.centers()
    free = scene.plan.contains(pts)
    grid.free[:] = free.reshape(ny, nx)
    fidx = np.nonzero(free)[0]
    if len(fidx) == 0:
        return grid
    fpts = pts[fidx]
    direct = np.zeros(len(pts), dtype=bool)
    direct[fidx] = direct_visible_mask(fpts, scene.camera, scene.plan)
    grid.direct[:] = direct.reshape(ny, nx)
    for k, mirror in enumerate(scene.mirrors):
        ind = np.zeros(len(pts), dtype=bool)
        ind[fidx] = mirror_visible_mask(fpts, scene.camera, mirror, scene.plan)
        grid.indirect[k] = ind.reshape(ny, nx)
    return grid


def zone_summary(scene: Scene, grid: CoverageGrid) -> list[dict]:
    """Per-zone coverage counts plus the marker-point covered flag."""
    covered = grid.covered()
    out = []
    for zone in scene.zones:
        zmask = grid.zone_cell_mask(zone)
        cells = int(zmask.sum())
        cov = int((zmask & covered).sum())
        direct = int((zmask & grid.direct & grid.free).sum())
        marker = zone.marker()
        out.append({
            "id": zone.id,
            "kind": zone.kind,
            "cells": cells,
            "covered_cells": cov,
            "direct_cells": direct,
            "coverage_fraction": (cov / cells) if cells else 0.0,
            "marker": [marker[0], marker[1]],
            "marker_covered": grid.point_covered(marker),
        })
    return out


def alignment_report(scene: Scene, grid: CoverageGrid) -> list[dict]:
    """Per-mirror: target cells its view covers, non-interest leakage, aligned flag.

    A mirror is aligned when its reflected view hits zero non-interest cells.
    """
    target_mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    leak_mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    for zone in scene.zones:
        zmask = grid.zone_cell_mask(zone)
        if zone.kind == "target":
            target_mask |= zmask
        else:
            leak_mask |= zmask
    out = []
    for k, mid in enumerate(grid.mirror_ids):
        ind = grid.indirect[k] & grid.free
        leakage = int((ind & leak_mask).sum())
        out.append({
            "mirror_id": mid,
            "target_cells_covered": int((ind & target_mask).sum()),
            "leakage_cells": leakage,
            "aligned": leakage == 0,
        })
    return out
