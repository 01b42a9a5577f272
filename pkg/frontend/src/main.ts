/**
 * Boot the editor: load (or seed) the scene, wire toolbar buttons and the
 * status panel.
 */

import { ApiError, PlannerApi } from './api.js';
import { EditorController } from './controller.js';
import type { MountDoc, SceneDoc } from './types.js';

const STARTER_SCENE: SceneDoc = {
  plan: {
    boundary: [[0, 0], [6, 0], [6, 4], [3, 4], [3, 7], [0, 7]],
    obstacles: [],
  },
  camera: {
    position: [5.2, 1.0], yaw: Math.PI / 2, fov: 2 * Math.PI,
    height: 2.5, pitch: 0.0, focal: 400, image_w: 640, image_h: 480,
  },
  mirrors: [],
  zones: [
    { id: 1, polygon: [[1, 1], [2, 1], [2, 2], [1, 2]], kind: 'target' },
    { id: 2, polygon: [[2.0, 5.6], [2.8, 5.6], [2.8, 6.3], [2.0, 6.3]], kind: 'target' },
    { id: 3, polygon: [[0.2, 4.1], [1.2, 4.1], [1.2, 4.6], [0.2, 4.6]], kind: 'non_interest' },
  ],
};

const STARTER_MOUNTS: MountDoc[] = [
  { segment: [[0.0, 4.8], [0.0, 6.8]], allowed_yaw: [-0.9, 0.9] },
  { segment: [[3.2, 4.0], [5.8, 4.0]],
    allowed_yaw: [-Math.PI / 2 - 0.9, -Math.PI / 2 + 0.9] },
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function loadScene(api: PlannerApi, sceneId: string): Promise<SceneDoc> {
  try {
    return JSON.parse(await api.getSceneText(sceneId)) as SceneDoc;
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) return STARTER_SCENE;
    throw err;
  }
}

function renderStatus(c: EditorController): void {
  const status = el<HTMLDivElement>('status');
  const totals = c.totals();
  const parts: string[] = [];
  if (c.busy) parts.push('<b>optimizing…</b>');
  if (totals) {
    parts.push(`covered <b>${totals.coveredCells}</b> / ${totals.freeCells} cells`);
    parts.push(`uncovered <b>${totals.uncoveredCells}</b>`);
    parts.push(`target markers <b>${totals.targetMarkersCovered}/${totals.targetMarkers}</b>`);
  }
  const alignment = c.overlay.alignment;
  if (alignment) {
    parts.push(alignment.all_aligned
      ? '<span class="ok">all mirrors aligned</span>'
      : '<span class="bad">leakage detected</span>');
  }
  if (c.state.dirty) parts.push('<i>unsynced edits</i>');
  status.innerHTML = parts.join(' &middot; ') || 'drag to edit, buttons to act';
  const errBox = el<HTMLDivElement>('error');
  errBox.textContent = c.state.error ?? '';
  errBox.style.display = c.state.error ? 'block' : 'none';
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const base = params.get('api') ?? 'http://127.0.0.1:8321';
  const sceneId = params.get('scene') ?? 'editor';
  const api = new PlannerApi(base);
  const canvas = el<HTMLCanvasElement>('floor');
  const scene = await loadScene(api, sceneId);
  const controller = new EditorController(
    canvas, api, sceneId, scene,
    { cellSize: 0.1, refreshDebounceMs: 150 }, renderStatus);

  el<HTMLButtonElement>('btn-add').onclick = () => {
    const b = scene.plan.boundary;
    const cx = b.reduce((s, p) => s + p[0], 0) / b.length;
    const cy = b.reduce((s, p) => s + p[1], 0) / b.length;
    controller.addMirrorAt([cx, cy]);
  };
  el<HTMLButtonElement>('btn-delete').onclick = () => controller.deleteSelected();
  el<HTMLButtonElement>('btn-refresh').onclick = () => void controller.pushAndRefresh();
  el<HTMLButtonElement>('btn-optimize').onclick = () => {
    const seed = Number(el<HTMLInputElement>('seed').value) || 0;
    const maxMirrors = Number(el<HTMLInputElement>('max-mirrors').value) || 1;
    void controller.optimize(STARTER_MOUNTS, {
      seed, max_mirrors: maxMirrors, iterations: 1200, cell_size: 0.1,
    });
  };
  el<HTMLButtonElement>('btn-export').onclick = async () => {
    const text = await controller.exportSceneText();
    const blob = new Blob([text], { type: 'application/json' });
    const a = document.createElement('a');
    a.href = URL.createObjectURL(blob);
    a.download = `${sceneId}.json`;
    a.click();
    URL.revokeObjectURL(a.href);
  };

  controller.redraw();
  await controller.pushAndRefresh();
}

void boot().catch((err) => {
  const errBox = document.getElementById('error');
  if (errBox) {
    errBox.textContent = `failed to start: ${err}`;
    (errBox as HTMLElement).style.display = 'block';
  }
});
