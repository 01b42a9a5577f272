/**
 * Meters-to-pixels viewport. World y points up, canvas y points down.
 */

import type { Point } from './types.js';

export interface Viewport {
  scale: number;    // pixels per meter
  offsetX: number;  // canvas x of world x=0
  offsetY: number;  // canvas y of world y=0
  canvasW: number;
  canvasH: number;
}

export function worldToScreen(vp: Viewport, p: Point): Point {
  return [vp.offsetX + p[0] * vp.scale, vp.offsetY - p[1] * vp.scale];
}

export function screenToWorld(vp: Viewport, p: Point): Point {
  return [(p[0] - vp.offsetX) / vp.scale, (vp.offsetY - p[1]) / vp.scale];
}

export function sceneBounds(points: Point[]): [number, number, number, number] {
  let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
  for (const [x, y] of points) {
    x0 = Math.min(x0, x);
    y0 = Math.min(y0, y);
    x1 = Math.max(x1, x);
    y1 = Math.max(y1, y);
  }
  return [x0, y0, x1, y1];
}

/** Viewport that fits the bounds into the canvas with uniform scale. */
export function fitViewport(
  bounds: [number, number, number, number],
  canvasW: number,
  canvasH: number,
  paddingPx = 24,
): Viewport {
  const [x0, y0, x1, y1] = bounds;
  const w = Math.max(x1 - x0, 1e-9);
  const h = Math.max(y1 - y0, 1e-9);
  const scale = Math.min(
    (canvasW - 2 * paddingPx) / w,
    (canvasH - 2 * paddingPx) / h,
  );
  // center the content
  const offsetX = (canvasW - scale * (x0 + x1)) / 2;
  const offsetY = (canvasH + scale * (y0 + y1)) / 2;
  return { scale, offsetX, offsetY, canvasW, canvasH };
}
