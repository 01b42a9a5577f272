/**
 * Editor state and pure edit operations on the scene draft.
 *
 * Edits are local transforms of the draft document (translate, rotate, add,
 * delete); whether the edited scene is valid is the service's call, and a
 * rejected push keeps the draft plus the inline error.
 */

import type { Hit } from './hittest.js';
import type { MirrorDoc, Point, SceneDoc } from './types.js';

export interface EditorState {
  scene: SceneDoc;
  selection: Hit;
  dirty: boolean;
  error: string | null;
}

export function initialState(scene: SceneDoc): EditorState {
  return { scene, selection: null, dirty: false, error: null };
}

function cloneScene(scene: SceneDoc): SceneDoc {
  return JSON.parse(JSON.stringify(scene)) as SceneDoc;
}

export function serializeScene(scene: SceneDoc): string {
  return JSON.stringify(scene, null, 2);
}

function mirrorIndex(scene: SceneDoc, id: number): number {
  const k = scene.mirrors.findIndex((m) => m.id === id);
  if (k < 0) throw new Error(`no mirror ${id} in draft`);
  return k;
}

export function mirrorCenter(m: MirrorDoc): Point {
  return [
    (m.segment[0][0] + m.segment[1][0]) / 2,
    (m.segment[0][1] + m.segment[1][1]) / 2,
  ];
}

export function moveMirror(state: EditorState, id: number, dx: number, dy: number): EditorState {
  const scene = cloneScene(state.scene);
  const m = scene.mirrors[mirrorIndex(scene, id)]!;
  for (const p of m.segment) {
    p[0] += dx;
    p[1] += dy;
  }
  return { ...state, scene, dirty: true };
}

/** Rotate the mirror about its center so the facing normal points at `toward`. */
export function aimMirror(state: EditorState, id: number, toward: Point): EditorState {
  const scene = cloneScene(state.scene);
  const m = scene.mirrors[mirrorIndex(scene, id)]!;
  const c = mirrorCenter(m);
  const nx = toward[0] - c[0];
  const ny = toward[1] - c[1];
  const nlen = Math.hypot(nx, ny);
  if (nlen < 1e-9) return state;
  const half = distOf(m.segment[0], m.segment[1]) / 2;
  const px = -ny / nlen;
  const py = nx / nlen;
  m.facing = [nx / nlen, ny / nlen];
  m.segment = [
    [c[0] - px * half, c[1] - py * half],
    [c[0] + px * half, c[1] + py * half],
  ];
  return { ...state, scene, dirty: true };
}

/** Drag one endpoint grip: the segment pivots around the other endpoint. */
export function dragMirrorEnd(
  state: EditorState,
  id: number,
  part: 'end0' | 'end1',
  world: Point,
): EditorState {
  const scene = cloneScene(state.scene);
  const m = scene.mirrors[mirrorIndex(scene, id)]!;
  const fixed = part === 'end0' ? m.segment[1] : m.segment[0];
  if (distOf(world, fixed) < 1e-6) return state;
  if (part === 'end0') m.segment[0] = [world[0], world[1]];
  else m.segment[1] = [world[0], world[1]];
  // keep the facing on the same side of the new segment line
  const [a, b] = m.segment;
  const ex = b[0] - a[0];
  const ey = b[1] - a[1];
  const len = Math.hypot(ex, ey);
  let nx = ey / len;
  let ny = -ex / len;
  if (nx * m.facing[0] + ny * m.facing[1] < 0) {
    nx = -nx;
    ny = -ny;
  }
  m.facing = [nx, ny];
  return { ...state, scene, dirty: true };
}

export function moveCamera(state: EditorState, dx: number, dy: number): EditorState {
  const scene = cloneScene(state.scene);
  scene.camera.position = [
    scene.camera.position[0] + dx,
    scene.camera.position[1] + dy,
  ];
  return { ...state, scene, dirty: true };
}

export function aimCamera(state: EditorState, toward: Point): EditorState {
  const scene = cloneScene(state.scene);
  const [cx, cy] = scene.camera.position;
  if (Math.hypot(toward[0] - cx, toward[1] - cy) < 1e-9) return state;
  scene.camera.yaw = Math.atan2(toward[1] - cy, toward[0] - cx);
  return { ...state, scene, dirty: true };
}

export function addMirror(state: EditorState, at: Point, lengthM = 0.8): EditorState {
  const scene = cloneScene(state.scene);
  const id = scene.mirrors.reduce((top, m) => Math.max(top, m.id), 0) + 1;
  scene.mirrors.push({
    id,
    segment: [
      [at[0] - lengthM / 2, at[1]],
      [at[0] + lengthM / 2, at[1]],
    ],
    facing: [0, 1],
    z_bottom: 1.0,
    z_top: 2.0,
    curvature: { kind: 'flat' },
  });
  return {
    ...state,
    scene,
    selection: { kind: 'mirror', id, part: 'body' },
    dirty: true,
  };
}

export function deleteSelection(state: EditorState): EditorState {
  if (state.selection?.kind !== 'mirror') return state;
  const id = state.selection.id;
  const scene = cloneScene(state.scene);
  scene.mirrors = scene.mirrors.filter((m) => m.id !== id);
  return { ...state, scene, selection: null, dirty: true };
}

export function deleteAllMirrors(state: EditorState): EditorState {
  const scene = cloneScene(state.scene);
  scene.mirrors = [];
  return { ...state, scene, selection: null, dirty: true };
}

/** Replace the draft's mirrors with an optimizer placement. */
export function applyPlacement(state: EditorState, mirrors: MirrorDoc[]): EditorState {
  const scene = cloneScene(state.scene);
  scene.mirrors = JSON.parse(JSON.stringify(mirrors)) as MirrorDoc[];
  return { ...state, scene, selection: null, dirty: true };
}

export function withSelection(state: EditorState, selection: Hit): EditorState {
  return { ...state, selection };
}

export function markSynced(state: EditorState): EditorState {
  return { ...state, dirty: false, error: null };
}

export function withError(state: EditorState, error: string): EditorState {
  return { ...state, error };
}

function distOf(a: Point, b: Point): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}
