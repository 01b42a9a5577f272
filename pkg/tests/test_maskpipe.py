"""Mask pipeline: quads, rasterization, blending, ablation switches."""

import json
import math

import numpy as np
import pytest

from mirrorcov.errors import RegionSourceError, ValidationError
from mirrorcov.imgio import ImageBuffer
from mirrorcov.maskpipe import (AblationConfig, MaskCache, MaskRaster,
                                QuadRegion, RegionSource, blend, generate_mask,
                                identify_regions, project_mirror_to_image,
                                quads_to_obj, rasterize_quad, run_pipeline)
from mirrorcov.scene import Camera, FloorPlan, Mirror, Scene


def quad(x0, y0, x1, y1, mirror_id=None):
    return QuadRegion(corners=((x0, y0), (x1, y0), (x1, y1), (x0, y1)),
                      mirror_id=mirror_id)


def brute_force_count(q, width, height):
    """Per-pixel point-in-quad via the documented fill rule."""
    n = 0
    for j in range(height):
        for i in range(width):
            n += q.contains(i + 0.5, j + 0.5)
    return n


class TestQuadRegion:
    def test_winding_normalized(self):
        a = quad(0, 0, 4, 4)
        b = QuadRegion(corners=tuple(reversed(a.corners)))
        assert a.corners == b.corners
        assert a.area() > 0

    def test_degenerate_rejected_with_corners_in_message(self):
        with pytest.raises(ValidationError) as err:
            QuadRegion(corners=((0, 0), (4, 0), (8, 0), (2, 0)))
        assert "(0" in str(err.value)

    def test_non_convex_rejected(self):
        with pytest.raises(ValidationError):
            QuadRegion(corners=((0, 0), (4, 0), (1, 1), (0, 4)))

    def test_wrong_corner_count(self):
        with pytest.raises(ValidationError):
            QuadRegion(corners=((0, 0), (1, 0), (1, 1)))


class TestGenerateMask:
    def test_empty_regions_all_zero(self):
        mask = generate_mask([], 64, 48)
        assert mask.popcount() == 0

    def test_full_frame_quad_all_one(self):
        mask = generate_mask([quad(-1, -1, 65, 49)], 64, 48)
        assert mask.popcount() == 64 * 48

    def test_two_disjoint_quads_popcount_adds(self):
        q1 = quad(2, 2, 10, 9)
        q2 = QuadRegion(corners=((20, 5), (30, 8), (28, 20), (21, 16)))
        mask = generate_mask([q1, q2], 40, 30)
        expected = brute_force_count(q1, 40, 30) + brute_force_count(q2, 40, 30)
        assert mask.popcount() == expected

    def test_matches_per_pixel_rule_on_random_quads(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            cx, cy = rng.uniform(5, 25, 2)
            pts = []
            for ang in sorted(rng.uniform(0, 2 * math.pi, 4)):
                r = rng.uniform(2, 8)
                pts.append((cx + r * math.cos(ang), cy + r * math.sin(ang)))
            try:
                q = QuadRegion(corners=tuple(pts))
            except ValidationError:
                continue
            mask = generate_mask([q], 32, 32)
            for j in range(32):
                for i in range(32):
                    assert bool(mask.bits[j, i]) == q.contains(i + 0.5, j + 0.5)

    def test_abutting_quads_share_edge_without_double_count(self):
        left = quad(2.5, 3.5, 10.5, 12.5)
        right = quad(10.5, 3.5, 18.5, 12.5)
        m_both = generate_mask([left, right], 32, 32)
        n_left = generate_mask([left], 32, 32).popcount()
        n_right = generate_mask([right], 32, 32).popcount()
        assert m_both.popcount() == n_left + n_right

    def test_mask_monotone_in_regions(self):
        q1 = quad(3, 3, 10, 10)
        q2 = quad(8, 8, 20, 14)
        small = generate_mask([q1], 32, 32)
        big = generate_mask([q1, q2], 32, 32)
        assert (big.bits >= small.bits).all()

    def test_quad_clipped_to_frame(self):
        mask = generate_mask([quad(-50, -50, 5, 5)], 16, 16)
        assert mask.popcount() == 25


class TestBlend:
    def test_all_one_mask_is_identity(self):
        img = ImageBuffer.filled(8, 6, (10, 20, 30))
        mask = MaskRaster(width=8, height=6, bits=np.ones((6, 8), dtype=np.uint8))
        out = blend(img, mask)
        assert np.array_equal(out.pixels, img.pixels)

    def test_all_zero_mask_blacks_out(self):
        img = ImageBuffer.filled(8, 6, (10, 20, 30))
        mask = MaskRaster(width=8, height=6, bits=np.zeros((6, 8), dtype=np.uint8))
        out = blend(img, mask)
        assert out.pixels.sum() == 0

    def test_half_frame_mask_byte_exact(self):
        rng = np.random.default_rng(2)
        px = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
        img = ImageBuffer(width=8, height=6, channels=3, pixels=px)
        bits = np.zeros((6, 8), dtype=np.uint8)
        bits[:, :4] = 1
        out = blend(img, MaskRaster(width=8, height=6, bits=bits))
        assert np.array_equal(out.pixels[:, :4], px[:, :4])
        assert out.pixels[:, 4:].sum() == 0

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        px = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
        img = ImageBuffer(width=8, height=6, channels=3, pixels=px)
        bits = (rng.random((6, 8)) < 0.5).astype(np.uint8)
        mask = MaskRaster(width=8, height=6, bits=bits)
        once = blend(img, mask)
        twice = blend(once, mask)
        assert np.array_equal(once.pixels, twice.pixels)

    def test_dimension_mismatch(self):
        img = ImageBuffer.filled(8, 6, (1, 2, 3))
        mask = MaskRaster(width=4, height=6, bits=np.zeros((6, 4), dtype=np.uint8))
        with pytest.raises(ValidationError):
            blend(img, mask)


def _projection_scene(yaw=math.pi / 2.0, mirror_seg=((-0.5, 3.0), (0.5, 3.0))):
    plan = FloorPlan(boundary=((-5, -5), (5, -5), (5, 5), (-5, 5)))
    cam = Camera(position=(0.0, 0.0), yaw=yaw, fov=math.pi, height=1.5,
                 pitch=0.0, focal=400.0, image_w=640, image_h=480)
    mirror = Mirror(id=1, segment=mirror_seg, facing=(0.0, -1.0),
                    z_bottom=1.0, z_top=2.0)
    return Scene(plan=plan, camera=cam, mirrors=(mirror,))


class TestProjection:
    def test_centered_mirror_projects_symmetrically(self):
        scene = _projection_scene()
        q = project_mirror_to_image(scene, 1)
        xs = sorted(c[0] for c in q.corners)
        assert xs[0] + xs[3] == pytest.approx(640.0, abs=1e-6)
        assert xs[1] + xs[2] == pytest.approx(640.0, abs=1e-6)

    def test_mirror_behind_camera_projects_to_none(self):
        scene = _projection_scene(yaw=-math.pi / 2.0)
        assert project_mirror_to_image(scene, 1) is None

    def test_matches_hand_rolled_projection_with_yaw(self):
        # camera yawed 10 degrees right of +y; derive expected pixels directly
        yaw = math.pi / 2.0 - math.radians(10.0)
        scene = _projection_scene(yaw=yaw)
        q = project_mirror_to_image(scene, 1)
        cam = scene.camera
        expected = []
        for (wx, wy), z in (((-0.5, 3.0), 1.0), ((0.5, 3.0), 1.0),
                            ((0.5, 3.0), 2.0), ((-0.5, 3.0), 2.0)):
            dx, dy, dz = wx - 0.0, wy - 0.0, z - cam.height
            fx, fy = math.cos(yaw), math.sin(yaw)
            zc = dx * fx + dy * fy
            xc = dx * math.sin(yaw) - dy * math.cos(yaw)
            u = 320.0 + 400.0 * xc / zc
            v = 240.0 - 400.0 * dz / zc
            expected.append((u, v))
        # winding normalization may reorder corners; match as a point set
        for want in expected:
            assert any(got == pytest.approx(want, abs=1e-9) for got in q.corners)
        # yawing right shifts the quad left of center
        assert max(c[0] for c in q.corners) < 320.0


class TestRegionSources:
    def test_annotation_round_trip(self, tmp_path):
        quads = [quad(1, 2, 30, 40, mirror_id=7), quad(50, 60, 70, 90, mirror_id=8)]
        (tmp_path / "img_0.json").write_text(json.dumps(quads_to_obj(quads)))
        src = RegionSource.annotation(tmp_path)
        got = identify_regions("img_0", src)
        assert [q.mirror_id for q in got] == [7, 8]
        assert got[0].corners == quads[0].corners

    def test_annotation_empty_list(self, tmp_path):
        (tmp_path / "img_1.json").write_text("[]")
        assert identify_regions("img_1", RegionSource.annotation(tmp_path)) == []

    def test_missing_annotation_raises(self, tmp_path):
        with pytest.raises(RegionSourceError):
            identify_regions("nope", RegionSource.annotation(tmp_path))

    def test_malformed_quad_lists_corners(self, tmp_path):
        (tmp_path / "img_2.json").write_text(
            '[{"mirror_id": 1, "corners": [[0,0],[4,0],[8,0],[2,0]]}]')
        with pytest.raises(ValidationError):
            identify_regions("img_2", RegionSource.annotation(tmp_path))

    def test_adapter_format(self, tmp_path):
        (tmp_path / "img_3.txt").write_text(
            "# detector output\n3 10 10 60 12 58 40 12 38\n")
        got = identify_regions("img_3", RegionSource.adapter(tmp_path))
        assert len(got) == 1 and got[0].mirror_id == 3

    def test_projection_source_skips_behind_camera(self):
        scene = _projection_scene(yaw=-math.pi / 2.0)
        got = identify_regions("any", RegionSource.projection(scene))
        assert got == []

    def test_projection_source_yields_quads(self):
        scene = _projection_scene()
        got = identify_regions("any", RegionSource.projection(scene))
        assert len(got) == 1 and got[0].mirror_id == 1


class TestRunPipeline:
    def _image(self):
        rng = np.random.default_rng(9)
        px = rng.integers(1, 256, size=(48, 64, 3), dtype=np.uint8)
        return ImageBuffer(width=64, height=48, channels=3, pixels=px)

    def _source(self, tmp_path):
        quads = [quad(8, 8, 40, 30, mirror_id=1)]
        (tmp_path / "img.json").write_text(json.dumps(quads_to_obj(quads)))
        return RegionSource.annotation(tmp_path)

    def test_mb_disabled_passes_through(self, tmp_path):
        img = self._image()
        out, mask = run_pipeline(img, self._source(tmp_path),
                                 AblationConfig(True, True, False), "img")
        assert mask is None
        assert np.array_equal(out.pixels, img.pixels)

    def test_tmg_disabled_passes_through(self, tmp_path):
        img = self._image()
        out, mask = run_pipeline(img, self._source(tmp_path),
                                 AblationConfig(True, False, True), "img")
        assert mask is None
        assert np.array_equal(out.pixels, img.pixels)

    def test_ivr_disabled_blacks_out_whole_image(self, tmp_path):
        img = self._image()
        out, mask = run_pipeline(img, self._source(tmp_path),
                                 AblationConfig(False, True, True), "img")
        assert mask is not None and mask.popcount() == 0
        assert out.pixels.sum() == 0

    def test_full_pipeline_keeps_region_only(self, tmp_path):
        img = self._image()
        out, mask = run_pipeline(img, self._source(tmp_path),
                                 AblationConfig(True, True, True), "img")
        assert mask.popcount() == 32 * 22
        assert np.array_equal(out.pixels[8:30, 8:40], img.pixels[8:30, 8:40])
        outside = out.pixels.sum() - out.pixels[8:30, 8:40].sum()
        assert outside == 0

    def test_cache_reuses_and_invalidates(self, tmp_path, monkeypatch):
        img = self._image()
        src = self._source(tmp_path)
        cache = MaskCache()
        calls = {"n": 0}
        import mirrorcov.maskpipe as mp
        real = mp.identify_regions

        def counting(image_id, source):
            calls["n"] += 1
            return real(image_id, source)

        monkeypatch.setattr(mp, "identify_regions", counting)
        run_pipeline(img, src, AblationConfig(), "img", cache=cache)
        run_pipeline(img, src, AblationConfig(), "img", cache=cache)
        assert calls["n"] == 1
        # a different source (new directory) misses the cache
        other_dir = tmp_path / "other"
        other_dir.mkdir()
        (other_dir / "img.json").write_text(
            json.dumps(quads_to_obj([quad(0, 0, 10, 10)])))
        run_pipeline(img, RegionSource.annotation(other_dir),
                     AblationConfig(), "img", cache=cache)
        assert calls["n"] == 2
