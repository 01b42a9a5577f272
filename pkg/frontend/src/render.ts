/**
 * Canvas drawing: floor plan, zones, heatmap cells, mirrors with alignment
 * badges, camera with FOV wedge.
 */

import { cellWorldRect, DIRECT_COLOR, mirrorColor, UNCOVERED_COLOR } from './heatmap.js';
import type { HeatCell } from './heatmap.js';
import { mirrorCenter } from './state.js';
import { worldToScreen } from './transform.js';
import type { Viewport } from './transform.js';
import type {
  AlignmentResponse,
  CoverageResponse,
  Point,
  SceneDoc,
} from './types.js';
import type { Hit } from './hittest.js';

function tracePolygon(ctx: CanvasRenderingContext2D, vp: Viewport, poly: Point[]): void {
  ctx.beginPath();
  poly.forEach((p, i) => {
    const [x, y] = worldToScreen(vp, p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.closePath();
}

export interface Overlay {
  grid: CoverageResponse | null;
  cells: HeatCell[];
  alignment: AlignmentResponse | null;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  scene: SceneDoc,
  overlay: Overlay,
  selection: Hit,
): void {
  ctx.clearRect(0, 0, vp.canvasW, vp.canvasH);
  ctx.fillStyle = '#15181d';
  ctx.fillRect(0, 0, vp.canvasW, vp.canvasH);

  // free space
  tracePolygon(ctx, vp, scene.plan.boundary);
  ctx.fillStyle = '#242a33';
  ctx.fill();

  // heatmap cells under everything else
  if (overlay.grid) {
    ctx.globalAlpha = 0.55;
    for (const cell of overlay.cells) {
      const [a, b] = cellWorldRect(overlay.grid, cell);
      const [x0, y0] = worldToScreen(vp, [a[0], b[1]]);
      const [x1, y1] = worldToScreen(vp, [b[0], a[1]]);
      ctx.fillStyle =
        cell.kind === 'direct' ? DIRECT_COLOR :
        cell.kind === 'indirect' ? mirrorColor(cell.mirrorId ?? 0, overlay.grid.mirror_ids) :
        UNCOVERED_COLOR;
      ctx.fillRect(x0, y0, Math.max(1, x1 - x0), Math.max(1, y1 - y0));
    }
    ctx.globalAlpha = 1.0;
  }

  // zones
  for (const zone of scene.zones) {
    tracePolygon(ctx, vp, zone.polygon);
    ctx.fillStyle = zone.kind === 'target'
      ? 'rgba(52, 211, 153, 0.25)' : 'rgba(251, 146, 60, 0.30)';
    ctx.fill();
    ctx.strokeStyle = zone.kind === 'target' ? '#34d399' : '#fb923c';
    ctx.lineWidth = 1.5;
    ctx.setLineDash([5, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // obstacles
  for (const obs of scene.plan.obstacles) {
    tracePolygon(ctx, vp, obs);
    ctx.fillStyle = '#3a4250';
    ctx.fill();
    ctx.strokeStyle = '#566072';
    ctx.stroke();
  }

  // walls on top
  tracePolygon(ctx, vp, scene.plan.boundary);
  ctx.strokeStyle = '#aab4c4';
  ctx.lineWidth = 2.5;
  ctx.stroke();

  drawCamera(ctx, vp, scene, selection);
  for (const m of scene.mirrors) {
    drawMirror(ctx, vp, scene, m.id, overlay, selection);
  }
}

function drawCamera(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  scene: SceneDoc,
  selection: Hit,
): void {
  const cam = scene.camera;
  const [x, y] = worldToScreen(vp, cam.position);
  const wedgeR = 1.6 * vp.scale;
  ctx.beginPath();
  ctx.moveTo(x, y);
  // canvas angles run clockwise; world yaw is counter-clockwise
  ctx.arc(x, y, wedgeR, -(cam.yaw + cam.fov / 2), -(cam.yaw - cam.fov / 2));
  ctx.closePath();
  ctx.fillStyle = 'rgba(59, 130, 246, 0.18)';
  ctx.fill();
  ctx.beginPath();
  ctx.arc(x, y, 6, 0, 2 * Math.PI);
  ctx.fillStyle = selection?.kind === 'camera' ? '#fbbf24' : '#3b82f6';
  ctx.fill();
  ctx.strokeStyle = '#0b1530';
  ctx.stroke();
}

function drawMirror(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  scene: SceneDoc,
  mirrorId: number,
  overlay: Overlay,
  selection: Hit,
): void {
  const m = scene.mirrors.find((mm) => mm.id === mirrorId)!;
  const [x0, y0] = worldToScreen(vp, m.segment[0]);
  const [x1, y1] = worldToScreen(vp, m.segment[1]);
  const selected = selection?.kind === 'mirror' && selection.id === m.id;
  const color = overlay.grid
    ? mirrorColor(m.id, overlay.grid.mirror_ids)
    : '#9ca3af';
  ctx.beginPath();
  ctx.moveTo(x0, y0);
  ctx.lineTo(x1, y1);
  ctx.strokeStyle = selected ? '#fbbf24' : color;
  ctx.lineWidth = 4;
  ctx.stroke();
  // facing tick from the midpoint
  const c = mirrorCenter(m);
  const tip: Point = [c[0] + m.facing[0] * 0.35, c[1] + m.facing[1] * 0.35];
  const [cx, cy] = worldToScreen(vp, c);
  const [tx, ty] = worldToScreen(vp, tip);
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(tx, ty);
  ctx.lineWidth = 1.5;
  ctx.stroke();
  // endpoint grips when selected
  if (selected) {
    for (const [gx, gy] of [[x0, y0], [x1, y1]] as const) {
      ctx.beginPath();
      ctx.arc(gx, gy, 5, 0, 2 * Math.PI);
      ctx.fillStyle = '#fbbf24';
      ctx.fill();
    }
  }
  // alignment badge
  const rec = overlay.alignment?.mirrors.find((r) => r.mirror_id === m.id);
  if (rec) {
    ctx.beginPath();
    ctx.arc(cx, cy - 14, 8, 0, 2 * Math.PI);
    ctx.fillStyle = rec.aligned ? '#10b981' : '#ef4444';
    ctx.fill();
    ctx.fillStyle = '#ffffff';
    ctx.font = 'bold 11px system-ui';
    ctx.textAlign = 'center';
    ctx.textBaseline = 'middle';
    ctx.fillText(rec.aligned ? '✓' : '!', cx, cy - 13);
  }
}
