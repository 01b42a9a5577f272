"""CLI subcommands: files in, files out, exit codes."""

import json
import math

import numpy as np
import pytest

from mirrorcov.cli import main
from mirrorcov.imgio import read_netpbm
from mirrorcov.maskpipe import quads_to_obj
from mirrorcov.scene import save_scene
from mirrorcov.synth import benchmark_mounts, benchmark_scene, synth_scene

import test_maskpipe


@pytest.fixture()
def scene_file(tmp_path):
    path = tmp_path / "scene.json"
    save_scene(synth_scene(0), path)
    return path


def test_unknown_subcommand_exits_1(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_missing_required_flag_exits_1(tmp_path):
    assert main(["coverage", "--cell", "0.1"]) == 1


def test_missing_input_file_exits_2(tmp_path):
    rc = main(["coverage", "--scene", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "g.json")])
    assert rc == 2


def test_invalid_scene_json_exits_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["coverage", "--scene", str(bad), "--out", str(tmp_path / "g.json")])
    assert rc == 1


def test_coverage_reports_occlusion_scenario(scene_file, tmp_path, capsys):
    # direct-vision-only analogue: strip the mirrors
    direct = synth_scene(0).without_mirrors()
    direct_file = tmp_path / "direct.json"
    save_scene(direct, direct_file)
    out = tmp_path / "grid.json"
    assert main(["coverage", "--scene", str(direct_file), "--cell", "0.1",
                 "--out", str(out)]) == 0
    assert "2 of 4 target markers visible" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    markers = [z["marker_covered"] for z in doc["summary"]["zones"]
               if z["kind"] == "target"]
    assert sum(markers) == 2
    # with mirrors deployed all four markers are visible
    out2 = tmp_path / "grid2.json"
    assert main(["coverage", "--scene", str(scene_file), "--cell", "0.1",
                 "--out", str(out2)]) == 0
    doc2 = json.loads(out2.read_text())
    markers2 = [z["marker_covered"] for z in doc2["summary"]["zones"]
                if z["kind"] == "target"]
    assert sum(markers2) == 4


def test_align_command(scene_file, tmp_path):
    out = tmp_path / "align.json"
    assert main(["align", "--scene", str(scene_file), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["all_aligned"] is True
    assert len(doc["mirrors"]) == 4


def test_mask_empty_regions_gives_black_pgm(tmp_path):
    regions = tmp_path / "empty.json"
    regions.write_text("[]")
    out = tmp_path / "m.pgm"
    assert main(["mask", "--regions", str(regions), "--size", "640x480",
                 "--out", str(out)]) == 0
    img = read_netpbm(out)
    assert img.width == 640 and img.height == 480
    assert img.pixels.sum() == 0


def test_mask_from_scene_projection(scene_file, tmp_path):
    out = tmp_path / "m.pgm"
    assert main(["mask", "--scene", str(scene_file), "--size", "640x480",
                 "--out", str(out)]) == 0
    assert read_netpbm(out).pixels.sum() > 0


def test_mask_bad_size_exits_1(tmp_path):
    regions = tmp_path / "empty.json"
    regions.write_text("[]")
    assert main(["mask", "--regions", str(regions), "--size", "640by480",
                 "--out", str(tmp_path / "m.pgm")]) == 1


def test_eval_on_worked_example(tmp_path, capsys):
    gt = tmp_path / "gt.jsonl"
    gt.write_text(
        '{"image_id": "a", "class_id": 0, "bbox": [0, 0, 10, 10]}\n'
        '{"image_id": "a", "class_id": 0, "bbox": [20, 0, 30, 10]}\n')
    dets = tmp_path / "d.jsonl"
    dets.write_text(
        '{"image_id": "a", "class_id": 0, "bbox": [0, 0, 10, 10], "confidence": 0.9}\n'
        '{"image_id": "a", "class_id": 0, "bbox": [50, 50, 60, 60], "confidence": 0.8}\n'
        '{"image_id": "a", "class_id": 0, "bbox": [20, 0, 30, 10], "confidence": 0.7}\n')
    out = tmp_path / "report.json"
    assert main(["eval", "--dets", str(dets), "--gt", str(gt),
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["map50"] == pytest.approx(5 / 6, abs=1e-12)


def test_filter_drops_outside_mask(tmp_path):
    regions = tmp_path / "regions.json"
    regions.write_text(json.dumps(quads_to_obj(
        [test_maskpipe.quad(0, 0, 320, 480, mirror_id=1)])))
    mask_path = tmp_path / "m.pgm"
    assert main(["mask", "--regions", str(regions), "--size", "640x480",
                 "--out", str(mask_path)]) == 0
    dets = tmp_path / "d.jsonl"
    dets.write_text(
        '{"image_id": "a", "class_id": 0, "bbox": [10, 10, 50, 50], "confidence": 0.9}\n'
        '{"image_id": "a", "class_id": 0, "bbox": [400, 10, 440, 50], "confidence": 0.9}\n')
    out = tmp_path / "kept.jsonl"
    assert main(["filter", "--dets", str(dets), "--mask", str(mask_path),
                 "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if l]
    assert len(lines) == 1
    assert json.loads(lines[0])["bbox"][0] == 10


def test_plan_command(tmp_path):
    scene_path = tmp_path / "bench.json"
    save_scene(benchmark_scene(), scene_path)
    mounts_path = tmp_path / "mounts.json"
    mounts_path.write_text(json.dumps([
        {"segment": [list(m.segment[0]), list(m.segment[1])],
         "allowed_yaw": list(m.allowed_yaw)} for m in benchmark_mounts()]))
    out = tmp_path / "placement.json"
    scene_out = tmp_path / "planned_scene.json"
    rc = main(["plan", "--scene", str(scene_path), "--mounts", str(mounts_path),
               "--max-mirrors", "1", "--seed", "0", "--out", str(out),
               "--scene-out", str(scene_out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["metrics"]["coverage_fraction"] >= 0.95
    assert doc["metrics"]["leakage_fraction"] == 0.0
    planned = json.loads(scene_out.read_text())
    assert len(planned["mirrors"]) == len(doc["mirrors"])


def test_synth_writes_dataset(tmp_path):
    out = tmp_path / "ds"
    rc = main(["synth", "--seed", "0", "--num-images", "8",
               "--out", str(out)])
    assert rc == 0
    assert len(list((out / "images").glob("*.ppm"))) == 8
    assert (out / "gt.jsonl").exists()
    assert (out / "split.json").exists()


def test_experiment_writes_report(tmp_path, capsys):
    out = tmp_path / "exp"
    rc = main(["experiment", "--seed", "0", "--num-images", "40",
               "--noise-fraction", "0.25", "--out", str(out)])
    assert rc == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["masked"]["precision"] >= doc["baseline"]["precision"]
    assert (out / "detections.jsonl").exists()
    assert (out / "detections_masked.jsonl").exists()
    assert "mAP50" in capsys.readouterr().out
