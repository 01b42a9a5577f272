/**
 * Wires pointer input, the scene draft and the service together.
 *
 * Edits mutate the local draft immediately for responsive dragging; the
 * draft is pushed and the coverage/alignment overlay re-fetched on drag end
 * (debounced, latest-wins). A validation failure from the service keeps the
 * draft and shows the error inline.
 */

import { LatestWins, PlannerApi } from './api.js';
import { coverageTotals, decodeCells } from './heatmap.js';
import { hitTest } from './hittest.js';
import type { Hit } from './hittest.js';
import {
  addMirror,
  aimCamera,
  aimMirror,
  applyPlacement,
  deleteSelection,
  dragMirrorEnd,
  initialState,
  markSynced,
  moveCamera,
  moveMirror,
  serializeScene,
  withError,
  withSelection,
} from './state.js';
import type { EditorState } from './state.js';
import { drawScene } from './render.js';
import type { Overlay } from './render.js';
import { fitViewport, sceneBounds, screenToWorld } from './transform.js';
import type { Viewport } from './transform.js';
import type { MountDoc, PlannerConfigDoc, SceneDoc } from './types.js';

export interface ControllerOptions {
  cellSize: number;
  refreshDebounceMs: number;
}

export class EditorController {
  state: EditorState;
  overlay: Overlay = { grid: null, cells: [], alignment: null };
  viewport: Viewport;
  busy = false;

  private readonly coverageGuard = new LatestWins();
  private refreshTimer: ReturnType<typeof setTimeout> | null = null;
  private drag: { hit: Hit; lastWorld: [number, number] } | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly api: PlannerApi,
    private readonly sceneId: string,
    scene: SceneDoc,
    private readonly opts: ControllerOptions = { cellSize: 0.1, refreshDebounceMs: 150 },
    private readonly onChange: (c: EditorController) => void = () => {},
  ) {
    this.state = initialState(scene);
    this.viewport = fitViewport(
      sceneBounds(scene.plan.boundary), canvas.width, canvas.height);
    canvas.addEventListener('pointerdown', (e) => this.pointerDown(e));
    canvas.addEventListener('pointermove', (e) => this.pointerMove(e));
    canvas.addEventListener('pointerup', () => this.pointerUp());
  }

  totals() {
    return this.overlay.grid ? coverageTotals(this.overlay.grid) : null;
  }

  private canvasWorld(e: PointerEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    return screenToWorld(this.viewport, [
      ((e.clientX - rect.left) * this.canvas.width) / rect.width,
      ((e.clientY - rect.top) * this.canvas.height) / rect.height,
    ]) as [number, number];
  }

  private pointerDown(e: PointerEvent): void {
    const world = this.canvasWorld(e);
    const tol = 12 / this.viewport.scale;
    const hit = hitTest(this.state.scene, world, tol);
    this.state = withSelection(this.state, hit);
    this.drag = hit ? { hit, lastWorld: world } : null;
    this.canvas.setPointerCapture(e.pointerId);
    this.redraw();
  }

  private pointerMove(e: PointerEvent): void {
    if (!this.drag?.hit) return;
    const world = this.canvasWorld(e);
    const [lx, ly] = this.drag.lastWorld;
    const dx = world[0] - lx;
    const dy = world[1] - ly;
    const hit = this.drag.hit;
    if (hit.kind === 'camera') {
      this.state = e.shiftKey
        ? aimCamera(this.state, world)
        : moveCamera(this.state, dx, dy);
    } else if (hit.kind === 'mirror') {
      if (hit.part === 'body') {
        this.state = e.shiftKey
          ? aimMirror(this.state, hit.id, world)
          : moveMirror(this.state, hit.id, dx, dy);
      } else {
        this.state = dragMirrorEnd(this.state, hit.id, hit.part, world);
      }
    }
    this.drag.lastWorld = world;
    this.redraw();
  }

  private pointerUp(): void {
    if (this.drag && this.state.dirty) this.scheduleRefresh();
    this.drag = null;
  }

  addMirrorAt(world: [number, number]): void {
    this.state = addMirror(this.state, world);
    this.redraw();
    this.scheduleRefresh();
  }

  deleteSelected(): void {
    this.state = deleteSelection(this.state);
    this.redraw();
    this.scheduleRefresh();
  }

  /** Debounced push-and-refetch; trailing edit wins. */
  scheduleRefresh(): void {
    if (this.refreshTimer) clearTimeout(this.refreshTimer);
    this.refreshTimer = setTimeout(() => {
      this.refreshTimer = null;
      void this.pushAndRefresh();
    }, this.opts.refreshDebounceMs);
  }

  /** Push the draft, then fetch coverage + alignment for the overlay. */
  async pushAndRefresh(): Promise<void> {
    try {
      await this.api.putSceneText(this.sceneId, serializeScene(this.state.scene));
    } catch (err) {
      this.state = withError(this.state, String((err as Error).message));
      this.redraw();
      return;
    }
    const result = await this.coverageGuard.run(async (signal) => {
      const grid = await this.api.coverage(this.sceneId, this.opts.cellSize, signal);
      const alignment = await this.api.alignment(this.sceneId, this.opts.cellSize, signal);
      return { grid, alignment };
    }).catch((err) => {
      this.state = withError(this.state, String((err as Error).message));
      return null;
    });
    if (result) {
      this.overlay = {
        grid: result.grid,
        cells: decodeCells(result.grid),
        alignment: result.alignment,
      };
      this.state = markSynced(this.state);
    }
    this.redraw();
  }

  /** Run the optimizer server-side and adopt the returned placement. */
  async optimize(mounts: MountDoc[], config: PlannerConfigDoc): Promise<void> {
    this.busy = true;
    this.onChange(this);
    try {
      await this.api.putSceneText(this.sceneId, serializeScene(this.state.scene));
      const job = await this.api.startOptimize(this.sceneId, mounts, config);
      const done = await this.api.pollJob(job.job_id);
      if (done.result) {
        this.state = applyPlacement(this.state, done.result.mirrors);
        await this.pushAndRefresh();
      }
    } catch (err) {
      this.state = withError(this.state, String((err as Error).message));
      this.redraw();
    } finally {
      this.busy = false;
      this.onChange(this);
    }
  }

  /** Byte-identical export: returns exactly what the service stores. */
  async exportSceneText(): Promise<string> {
    await this.api.putSceneText(this.sceneId, serializeScene(this.state.scene));
    return this.api.getSceneText(this.sceneId);
  }

  redraw(): void {
    const ctx = this.canvas.getContext('2d');
    if (ctx) {
      drawScene(ctx, this.viewport, this.state.scene, this.overlay,
                this.state.selection);
    }
    this.onChange(this);
  }
}
