/**
 * Pointer hit-testing in world coordinates. This is the only geometry the
 * client does on its own; all coverage questions go to the service.
 */

import type { Point, SceneDoc } from './types.js';

export type Hit =
  | { kind: 'camera' }
  | { kind: 'mirror'; id: number; part: 'body' | 'end0' | 'end1' }
  | null;

export function dist(a: Point, b: Point): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}

export function pointSegmentDistance(p: Point, a: Point, b: Point): number {
  const dx = b[0] - a[0];
  const dy = b[1] - a[1];
  const len2 = dx * dx + dy * dy;
  let t = len2 === 0 ? 0 : ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

/** Closest editable entity within tolerance; endpoint grips win over bodies. */
export function hitTest(scene: SceneDoc, world: Point, tolM: number): Hit {
  for (const m of scene.mirrors) {
    if (dist(world, m.segment[0]) <= tolM) return { kind: 'mirror', id: m.id, part: 'end0' };
    if (dist(world, m.segment[1]) <= tolM) return { kind: 'mirror', id: m.id, part: 'end1' };
  }
  if (dist(world, scene.camera.position) <= tolM) return { kind: 'camera' };
  let best: Hit = null;
  let bestD = tolM;
  for (const m of scene.mirrors) {
    const d = pointSegmentDistance(world, m.segment[0], m.segment[1]);
    if (d <= bestD) {
      bestD = d;
      best = { kind: 'mirror', id: m.id, part: 'body' };
    }
  }
  return best;
}
