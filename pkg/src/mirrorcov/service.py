"""HTTP service backing the planner UI.

State lives in a directory of JSON files (scenes, finished jobs) plus an
in-memory table for running jobs; restarting the service over the same store
reproduces every GET response. Core operations are pure, so only the store
and the job table are guarded by a lock. One optimize job per scene may run
at a time; a second submission is rejected with 409.
"""

from __future__ import annotations

import base64
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .coverage import alignment_report, coverage_map, grid_to_dict, zone_summary
from .errors import MirrorcovError
from .imgio import netpbm_bytes
from .maskpipe import generate_mask, project_mirror_to_image, quads_to_obj
from .planner import PlannerConfig, mounts_from_obj, optimize, placement_to_dict
from .scene import Scene, scene_from_dict


class SceneStore:
    """Scenes as raw validated JSON bytes keyed by id; jobs under jobs/."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(exist_ok=True)

    def scene_path(self, scene_id: str) -> Path:
        return self.root / f"{scene_id}.json"

    def put(self, scene_id: str, body: bytes) -> None:
        self.scene_path(scene_id).write_bytes(body)

    def get_bytes(self, scene_id: str) -> bytes | None:
        path = self.scene_path(scene_id)
        return path.read_bytes() if path.exists() else None

    def get_scene(self, scene_id: str) -> Scene | None:
        raw = self.get_bytes(scene_id)
        if raw is None:
            return None
        return scene_from_dict(json.loads(raw))

    def job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def save_job(self, record: dict) -> None:
        self.job_path(record["job_id"]).write_text(
            json.dumps(record, indent=2) + "\n", encoding="utf-8")

    def load_job(self, job_id: str) -> dict | None:
        path = self.job_path(job_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def count_jobs(self, scene_id: str) -> int:
        return len(list((self.root / "jobs").glob(f"{scene_id}-*.json")))


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": detail})


def create_app(store_dir) -> FastAPI:
    app = FastAPI(title="mirrorcov planning service")
    store = SceneStore(store_dir)
    lock = threading.Lock()
    running_jobs: dict[str, dict] = {}   # job_id -> record (pending/running)
    busy_scenes: set[str] = set()

    def load_scene_or_error(scene_id: str):
        try:
            scene = store.get_scene(scene_id)
        except (MirrorcovError, json.JSONDecodeError) as exc:
            return None, _error(422, f"stored scene is invalid: {exc}")
        if scene is None:
            return None, _error(404, f"no scene {scene_id!r}")
        return scene, None

    @app.put("/scene/{scene_id}")
    async def put_scene(scene_id: str, request: Request):
        body = await request.body()
        try:
            scene_from_dict(json.loads(body))
        except json.JSONDecodeError as exc:
            return _error(422, f"invalid JSON: {exc}")
        except MirrorcovError as exc:
            return _error(422, str(exc))
        with lock:
            store.put(scene_id, body)
        return {"scene_id": scene_id, "stored": True}

    @app.get("/scene/{scene_id}")
    def get_scene(scene_id: str):
        raw = store.get_bytes(scene_id)
        if raw is None:
            return _error(404, f"no scene {scene_id!r}")
        return Response(content=raw, media_type="application/json")

    @app.post("/scene/{scene_id}/coverage")
    def post_coverage(scene_id: str, body: dict | None = None):
        scene, err = load_scene_or_error(scene_id)
        if err:
            return err
        cell = float((body or {}).get("cell_size", 0.1))
        try:
            grid = coverage_map(scene, cell)
        except MirrorcovError as exc:
            return _error(422, str(exc))
        doc = grid_to_dict(grid)
        doc["summary"] = {
            "free_cells": int(grid.free.sum()),
            "covered_cells": int(grid.covered().sum()),
            "uncovered_cells": int(grid.uncovered().sum()),
            "zones": zone_summary(scene, grid),
        }
        return doc

    @app.post("/scene/{scene_id}/alignment")
    def post_alignment(scene_id: str, body: dict | None = None):
        scene, err = load_scene_or_error(scene_id)
        if err:
            return err
        cell = float((body or {}).get("cell_size", 0.1))
        try:
            grid = coverage_map(scene, cell)
        except MirrorcovError as exc:
            return _error(422, str(exc))
        mirrors = alignment_report(scene, grid)
        return {"mirrors": mirrors,
                "all_aligned": all(m["aligned"] for m in mirrors)}

    @app.post("/scene/{scene_id}/mask-preview")
    def post_mask_preview(scene_id: str, body: dict | None = None):
        scene, err = load_scene_or_error(scene_id)
        if err:
            return err
        body = body or {}
        width = int(body.get("width", scene.camera.image_w))
        height = int(body.get("height", scene.camera.image_h))
        quads = []
        for mirror in scene.mirrors:
            q = project_mirror_to_image(scene, mirror.id)
            if q is not None:
                quads.append(q)
        mask = generate_mask(quads, width, height)
        return {
            "width": width,
            "height": height,
            "quads": quads_to_obj(quads),
            "mask_pgm_base64": base64.b64encode(
                netpbm_bytes(mask.to_image())).decode("ascii"),
        }

    def run_job(record: dict, scene: Scene, mounts, config: PlannerConfig):
        scene_id = record["scene_id"]
        try:
            placement = optimize(scene, mounts, config)
            record.update(status="done", result=placement_to_dict(placement))
        except Exception as exc:  # job errors surface through the record
            record.update(status="failed", error=str(exc))
        with lock:
            store.save_job(record)
            running_jobs.pop(record["job_id"], None)
            busy_scenes.discard(scene_id)

    @app.post("/scene/{scene_id}/optimize")
    def post_optimize(scene_id: str, body: dict | None = None):
        scene, err = load_scene_or_error(scene_id)
        if err:
            return err
        body = body or {}
        try:
            mounts = mounts_from_obj(body.get("mounts", []))
            cfg_doc = body.get("config", {})
            config = PlannerConfig(
                max_mirrors=int(cfg_doc.get("max_mirrors", 2)),
                iterations=int(cfg_doc.get("iterations", 1200)),
                seed=int(cfg_doc.get("seed", 0)),
                cell_size=float(cfg_doc.get("cell_size", 0.1)))
            if not mounts:
                return _error(422, "optimize requires at least one mount")
        except (MirrorcovError, KeyError, TypeError, ValueError) as exc:
            return _error(422, f"bad optimize request: {exc}")
        with lock:
            if scene_id in busy_scenes:
                return _error(409, f"an optimize job for scene {scene_id!r} "
                                   "is already running")
            seq = store.count_jobs(scene_id) + 1
            job_id = f"{scene_id}-{seq}"
            record = {"job_id": job_id, "scene_id": scene_id, "kind": "optimize",
                      "status": "running", "result": None, "error": None}
            running_jobs[job_id] = record
            busy_scenes.add(scene_id)
        thread = threading.Thread(target=run_job,
                                  args=(record, scene, mounts, config),
                                  daemon=True)
        thread.start()
        return {"job_id": job_id, "kind": "optimize", "status": "pending"}

    @app.get("/job/{job_id}")
    def get_job(job_id: str):
        with lock:
            record = running_jobs.get(job_id)
            if record is None:
                record = store.load_job(job_id)
        if record is None:
            return _error(404, f"no job {job_id!r}")
        return record

    return app
