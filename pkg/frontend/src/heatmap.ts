/**
 * Decode the coverage grid payload into drawable cells. No coverage math
 * happens here: labels are read back exactly as the service sent them.
 */

import type { CoverageResponse, Point } from './types.js';

export type CellKind = 'direct' | 'indirect' | 'uncovered';

export interface HeatCell {
  ix: number;
  iy: number;
  kind: CellKind;
  mirrorId?: number;  // first covering mirror, for per-mirror coloring
}

const MIRROR_PALETTE = [
  '#31c48d', '#8b5cf6', '#f59e0b', '#06b6d4', '#ec4899', '#84cc16',
];

export function mirrorColor(mirrorId: number, mirrorIds: number[]): string {
  const k = Math.max(0, mirrorIds.indexOf(mirrorId));
  return MIRROR_PALETTE[k % MIRROR_PALETTE.length]!;
}

export const DIRECT_COLOR = '#3b82f6';
export const UNCOVERED_COLOR = '#ef4444';

function bit(rows: string[], ix: number, iy: number): boolean {
  const row = rows[iy];
  return row !== undefined && row.charAt(ix) === '1';
}

export function decodeCells(grid: CoverageResponse): HeatCell[] {
  const cells: HeatCell[] = [];
  for (let iy = 0; iy < grid.ny; iy++) {
    for (let ix = 0; ix < grid.nx; ix++) {
      if (!bit(grid.free, ix, iy)) continue;
      if (bit(grid.direct, ix, iy)) {
        cells.push({ ix, iy, kind: 'direct' });
        continue;
      }
      let mirrorId: number | undefined;
      for (const mid of grid.mirror_ids) {
        const rows = grid.indirect[String(mid)];
        if (rows && bit(rows, ix, iy)) {
          mirrorId = mid;
          break;
        }
      }
      if (mirrorId !== undefined) {
        cells.push({ ix, iy, kind: 'indirect', mirrorId });
      } else {
        cells.push({ ix, iy, kind: 'uncovered' });
      }
    }
  }
  return cells;
}

export function cellWorldRect(
  grid: CoverageResponse,
  cell: HeatCell,
): [Point, Point] {
  const [ox, oy] = grid.origin;
  const s = grid.cell_size;
  return [
    [ox + cell.ix * s, oy + cell.iy * s],
    [ox + (cell.ix + 1) * s, oy + (cell.iy + 1) * s],
  ];
}

export interface CoverageTotals {
  freeCells: number;
  coveredCells: number;
  uncoveredCells: number;
  targetMarkersCovered: number;
  targetMarkers: number;
}

/** Headline numbers straight from the service summary. */
export function coverageTotals(grid: CoverageResponse): CoverageTotals {
  const zones = grid.summary.zones.filter((z) => z.kind === 'target');
  return {
    freeCells: grid.summary.free_cells,
    coveredCells: grid.summary.covered_cells,
    uncoveredCells: grid.summary.uncovered_cells,
    targetMarkersCovered: zones.filter((z) => z.marker_covered).length,
    targetMarkers: zones.length,
  };
}
