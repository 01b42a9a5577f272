"""Command-line entry points.

Exit codes: 0 success, 1 validation error, 2 I/O error. Every output path
is an explicit flag; nothing is written implicitly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coverage import alignment_report, coverage_map, grid_to_dict, zone_summary
from .deteval import (evaluate, filter_detections, load_detections,
                      load_ground_truth, save_detections)
from .errors import MirrorcovError, ValidationError
from .imgio import read_netpbm, write_netpbm
from .maskpipe import MaskRaster, generate_mask, quads_from_obj, quads_to_obj
from .planner import (PlannerConfig, mounts_from_obj, optimize,
                      placement_scene, placement_to_dict)
from .scene import load_scene, save_scene
from .synth import (SynthConfig, format_comparison, oracle_detector,
                    run_experiment, save_dataset, synth_dataset, synth_scene)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise ValidationError(f"bad --size {text!r}, expected WxH") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="mirrorcov",
                     description="Mirror coverage planning and mask-filtered "
                                 "detection evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="compute the coverage grid for a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--cell", type=float, default=0.1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("align", help="per-mirror alignment report")
    p.add_argument("--scene", required=True)
    p.add_argument("--cell", type=float, default=0.1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plan", help="optimize mirror placements")
    p.add_argument("--scene", required=True)
    p.add_argument("--mounts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scene-out", help="also write the scene with planned mirrors")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=1200)
    p.add_argument("--max-mirrors", type=int, default=2)
    p.add_argument("--cell", type=float, default=0.1)

    p = sub.add_parser("mask", help="rasterize region quads to a PGM mask")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--regions", help="JSON list of quad regions")
    src.add_argument("--scene", help="project the scene's mirrors instead")
    p.add_argument("--size", required=True, help="WxH in pixels")
    p.add_argument("--out", required=True)

    p = sub.add_parser("filter", help="drop detections outside a mask")
    p.add_argument("--dets", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--min-inside", type=float, default=0.5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="precision/recall/mAP50 report")
    p.add_argument("--dets", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--conf-floor", type=float, default=0.25)
    p.add_argument("--out")

    p = sub.add_parser("synth", help="synthesize a scene and image dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--num-images", type=int, default=800)
    p.add_argument("--size", default="640x480")
    p.add_argument("--noise-fraction", type=float, default=0.125)
    p.add_argument("--skip-images", action="store_true",
                   help="write annotations only, no PPM/PGM files")

    p = sub.add_parser("experiment", help="baseline-vs-masked comparison run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--num-images", type=int, default=800)
    p.add_argument("--size", default="640x480")
    p.add_argument("--noise-fraction", type=float, default=0.125)
    p.add_argument("--min-inside", type=float, default=0.5)
    p.add_argument("--write-images", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP planning service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return parser


def cmd_coverage(args) -> int:
    scene = load_scene(args.scene)
    grid = coverage_map(scene, args.cell)
    doc = grid_to_dict(grid)
    covered = grid.covered()
    doc["summary"] = {
        "free_cells": int(grid.free.sum()),
        "direct_cells": int((grid.direct & grid.free).sum()),
        "covered_cells": int(covered.sum()),
        "uncovered_cells": int(grid.uncovered().sum()),
        "zones": zone_summary(scene, grid),
    }
    _write_json(doc, args.out)
    zs = doc["summary"]["zones"]
    n_target = sum(1 for z in zs if z["kind"] == "target")
    n_marked = sum(1 for z in zs if z["kind"] == "target" and z["marker_covered"])
    print(f"coverage: {doc['summary']['covered_cells']} of "
          f"{doc['summary']['free_cells']} free cells covered; "
          f"{n_marked} of {n_target} target markers visible")
    return 0


def cmd_align(args) -> int:
    scene = load_scene(args.scene)
    grid = coverage_map(scene, args.cell)
    mirrors = alignment_report(scene, grid)
    doc = {"mirrors": mirrors, "all_aligned": all(m["aligned"] for m in mirrors)}
    _write_json(doc, args.out)
    for m in mirrors:
        status = "aligned" if m["aligned"] else f"leaks {m['leakage_cells']} cells"
        print(f"mirror {m['mirror_id']}: {status}, "
              f"{m['target_cells_covered']} target cells")
    return 0


def cmd_plan(args) -> int:
    scene = load_scene(args.scene)
    mounts = mounts_from_obj(_read_json(args.mounts))
    config = PlannerConfig(max_mirrors=args.max_mirrors, seed=args.seed,
                           iterations=args.iterations, cell_size=args.cell)
    placement = optimize(scene, mounts, config)
    _write_json(placement_to_dict(placement), args.out)
    if args.scene_out:
        save_scene(placement_scene(scene, placement), args.scene_out)
    print(f"planned {len(placement.mirrors)} mirror(s): "
          f"coverage {placement.coverage_fraction:.3f} "
          f"(direct-only {placement.direct_coverage_fraction:.3f}), "
          f"leakage {placement.leakage_fraction:.3f}, score {placement.score:.4f}")
    return 0


def cmd_mask(args) -> int:
    w, h = _parse_size(args.size)
    if args.regions:
        quads = quads_from_obj(_read_json(args.regions))
    else:
        from .maskpipe import RegionSource, identify_regions
        quads = identify_regions("", RegionSource.projection(load_scene(args.scene)))
    mask = generate_mask(quads, w, h)
    write_netpbm(mask.to_image(), args.out)
    print(f"mask {w}x{h}: {mask.popcount()} pixels set from {len(quads)} quads")
    return 0


def cmd_filter(args) -> int:
    dets = load_detections(args.dets)
    mask = MaskRaster.from_image(read_netpbm(args.mask))
    kept = filter_detections(dets, mask, args.min_inside)
    save_detections(kept, args.out)
    print(f"kept {len(kept)} of {len(dets)} detections")
    return 0


def cmd_eval(args) -> int:
    dets = load_detections(args.dets)
    gts = load_ground_truth(args.gt)
    report = evaluate(dets, gts, iou_threshold=args.iou,
                      confidence_floor=args.conf_floor)
    doc = report.to_dict()
    if args.out:
        _write_json(doc, args.out)
    print(f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
          f"mAP50 {report.map50:.4f}  (tp {report.tp} fp {report.fp} fn {report.fn})")
    return 0


def _synth_config(args) -> SynthConfig:
    w, h = _parse_size(args.size)
    return SynthConfig(seed=args.seed, num_images=args.num_images,
                       image_w=w, image_h=h,
                       noise_image_fraction=args.noise_fraction)


def cmd_synth(args) -> int:
    scene = synth_scene(args.seed)
    config = _synth_config(args)
    dataset = synth_dataset(scene, config)
    save_dataset(dataset, args.out, write_images=not args.skip_images)
    n_noise = sum(1 for p in dataset.plans if p.flags)
    print(f"dataset: {len(dataset.plans)} images ({n_noise} with flag noise), "
          f"{len(dataset.gts)} fire boxes -> {args.out}")
    return 0


def cmd_experiment(args) -> int:
    import time
    t0 = time.monotonic()
    scene = synth_scene(args.seed)
    config = _synth_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = synth_dataset(scene, config)
    save_dataset(dataset, out, write_images=args.write_images)
    dets = oracle_detector(dataset, config)
    save_detections(dets, out / "detections.jsonl")
    mask = generate_mask(dataset.quads, config.image_w, config.image_h)
    masked = filter_detections(dets, mask, args.min_inside)
    save_detections(masked, out / "detections_masked.jsonl")
    report = run_experiment(scene, config, min_inside=args.min_inside,
                            dataset=dataset, dets=dets)
    _write_json(report, out / "report.json")
    print(format_comparison(report))
    # throughput goes to stdout only; report files stay byte-deterministic
    elapsed = time.monotonic() - t0
    print(f"{config.num_images} images in {elapsed:.2f}s "
          f"({config.num_images / elapsed:.0f} img/s on this machine)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "coverage": cmd_coverage,
    "align": cmd_align,
    "plan": cmd_plan,
    "mask": cmd_mask,
    "filter": cmd_filter,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "experiment": cmd_experiment,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args)
    except MirrorcovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
