"""Geometry core: reflection, visibility polygons, mirror view regions."""

import math

import numpy as np
import pytest

from mirrorcov.errors import InvalidGeometryError, InvalidSceneError
from mirrorcov.geometry import (direct_visible_mask, facet_visible_mask,
                                mirror_view_region, mirror_visible_mask,
                                reflect_point, visibility_polygon)
from mirrorcov.scene import Camera, Curvature, FloorPlan, Mirror, Scene

import oracles
import scenes

TWO_PI = 2 * math.pi


class TestReflectPoint:
    def test_axis_symmetry(self):
        assert reflect_point((3, 4), ((0, 0), (1, 0))) == (3.0, -4.0)

    def test_fixed_point_on_line(self):
        p = reflect_point((2.0, 2.0), ((0, 0), (1, 1)))
        assert p == pytest.approx((2.0, 2.0), abs=1e-12)

    def test_involution_and_isometry(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a = tuple(rng.uniform(-5, 5, 2))
            b = tuple(rng.uniform(-5, 5, 2))
            if math.hypot(b[0] - a[0], b[1] - a[1]) < 1e-6:
                continue
            p = tuple(rng.uniform(-5, 5, 2))
            q = tuple(rng.uniform(-5, 5, 2))
            rp = reflect_point(p, (a, b))
            rq = reflect_point(q, (a, b))
            back = reflect_point(rp, (a, b))
            assert back == pytest.approx(p, abs=1e-9)
            assert math.dist(rp, rq) == pytest.approx(math.dist(p, q), abs=1e-9)

    def test_degenerate_line_rejected(self):
        with pytest.raises(InvalidGeometryError):
            reflect_point((1, 1), ((2, 3), (2, 3)))


class TestVisibilityPolygon:
    def test_convex_room_full_fov_exact_area(self):
        plan = scenes.square_room(side=1.0)
        region = visibility_polygon((0.5, 0.5), 0.0, TWO_PI, plan)
        assert region.area() == pytest.approx(1.0, abs=1e-9)

    def test_pillar_room_area_matches_ray_oracle(self):
        plan = scenes.pillar_room()
        origin = (1.2, 1.1)
        region = visibility_polygon(origin, 0.0, TWO_PI, plan)
        oracle = oracles.visibility_area_by_rays(
            origin, 0.0, TWO_PI, oracles.walls_of(plan), n_rays=100_000)
        assert region.area() == pytest.approx(oracle, rel=0.01)

    def test_l_room_pocket_excluded(self):
        plan = scenes.l_room()
        origin = (3.5, 1.0)
        region = visibility_polygon(origin, 0.0, TWO_PI, plan)
        # deep in the arm, hidden behind the inner corner
        assert not region.contains_point((0.3, 3.8))
        assert region.contains_point((3.0, 1.0))
        oracle = oracles.visibility_area_by_rays(
            origin, 0.0, TWO_PI, oracles.walls_of(plan), n_rays=100_000)
        assert region.area() == pytest.approx(oracle, rel=0.01)

    def test_fov_wedge_limits_area(self):
        plan = scenes.square_room(side=2.0)
        full = visibility_polygon((1.0, 1.0), 0.0, TWO_PI, plan)
        wedge = visibility_polygon((1.0, 1.0), 0.0, math.pi / 2, plan)
        assert wedge.area() < full.area()
        oracle = oracles.visibility_area_by_rays(
            (1.0, 1.0), 0.0, math.pi / 2, oracles.walls_of(plan), n_rays=50_000)
        assert wedge.area() == pytest.approx(oracle, rel=0.01)

    def test_origin_outside_raises(self):
        plan = scenes.square_room(side=1.0)
        with pytest.raises(InvalidSceneError):
            visibility_polygon((2.0, 2.0), 0.0, TWO_PI, plan)

    def test_area_bounded_by_free_space_and_vertices_on_walls(self):
        for seed in range(5):
            scene = scenes.random_room_scene(seed)
            plan = scene.plan
            region = visibility_polygon(scene.camera.position, scene.camera.yaw,
                                        scene.camera.fov, plan)
            free_area = abs_poly_area(plan.boundary) - sum(
                abs_poly_area(o) for o in plan.obstacles)
            assert region.area() <= free_area + 1e-9
            walls = oracles.walls_of(plan)
            for poly in region.pieces:
                for v in poly:
                    if v == scene.camera.position:
                        continue
                    assert _near_any_wall_or_boundary_ray(v, walls, scene) < 1e-5

    def test_extra_occluders_shrink_region(self):
        plan = scenes.square_room(side=4.0)
        base = visibility_polygon((2.0, 2.0), 0.0, TWO_PI, plan)
        cut = visibility_polygon((2.0, 2.0), 0.0, TWO_PI, plan,
                                 occluders=[((3.0, 1.0), (3.0, 3.0))])
        assert cut.area() < base.area()
        assert not cut.contains_point((3.5, 2.0))


def abs_poly_area(poly):
    a = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        a += x0 * y1 - x1 * y0
    return abs(a) / 2


def _near_any_wall_or_boundary_ray(v, walls, scene):
    best = min(_point_seg_dist(v, a, b) for a, b in walls)
    if scene.camera.fov < TWO_PI - 1e-9:
        for bound in (scene.camera.yaw - scene.camera.fov / 2,
                      scene.camera.yaw + scene.camera.fov / 2):
            best = min(best, _point_ray_dist(v, scene.camera.position, bound))
    return best


def _point_seg_dist(p, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / max(dx * dx + dy * dy, 1e-30)
    t = min(max(t, 0.0), 1.0)
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def _point_ray_dist(p, origin, ang):
    dx, dy = math.cos(ang), math.sin(ang)
    t = max((p[0] - origin[0]) * dx + (p[1] - origin[1]) * dy, 0.0)
    return math.hypot(p[0] - origin[0] - t * dx, p[1] - origin[1] - t * dy)


class TestMirrorViewRegion:
    def test_mirror_not_visible_gives_empty_region(self):
        # mirror tucked in the arm, camera has no sight line to it
        scene = scenes.l_room_corner_mirror()
        hidden = Mirror(id=2, segment=((0.2, 3.6), (0.8, 3.6)), facing=(0, 1))
        region = mirror_view_region(scene.camera, hidden, scene.plan)
        assert region.pieces == ()

    def test_camera_behind_mirror_gives_empty_region(self):
        plan = scenes.square_room(side=4.0)
        cam = Camera(position=(2.0, 3.0), yaw=0.0, fov=TWO_PI)
        m = Mirror(id=1, segment=((1.0, 2.0), (3.0, 2.0)), facing=(0, -1))
        region = mirror_view_region(cam, m, plan)
        assert region.pieces == ()

    def test_l_room_corner_mirror_sees_pocket(self):
        scene = scenes.l_room_corner_mirror()
        mirror = scene.mirrors[0]
        region = mirror_view_region(scene.camera, mirror, scene.plan)
        assert region.contains_point((1.5, 2.8))
        facet = mirror.facets()[0]
        oracle = oracles.mirror_area_by_rays(
            scene.camera.position, scene.camera.yaw, scene.camera.fov,
            oracles.walls_of(scene.plan), facet.a, facet.b, facet.normal,
            n_rays=100_000)
        assert region.area() == pytest.approx(oracle, rel=0.01)

    def test_region_agrees_with_point_oracle(self):
        scene = scenes.l_room_corner_mirror()
        mirror = scene.mirrors[0]
        region = mirror_view_region(scene.camera, mirror, scene.plan)
        pts = scenes.sample_free_points(scene.plan, 4000, seed=11)
        facet = mirror.facets()[0]
        oracle = oracles.mirror_visible_points(
            scene.camera.position, scene.camera.yaw, scene.camera.fov,
            oracles.walls_of(scene.plan), facet.a, facet.b, facet.normal, pts)
        agree = (region.contains(pts) == oracle).mean()
        assert agree >= 0.99

    def test_predicate_matches_region_on_random_scenes(self):
        for seed in range(4):
            scene = scenes.random_room_scene(seed, n_mirrors=1)
            if not scene.mirrors:
                continue
            mirror = scene.mirrors[0]
            region = mirror_view_region(scene.camera, mirror, scene.plan)
            pts = scenes.sample_free_points(scene.plan, 2500, seed=seed + 100)
            pred = mirror_visible_mask(pts, scene.camera, mirror, scene.plan)
            agree = (region.contains(pts) == pred).mean()
            assert agree >= 0.99

    def test_faceted_convex_mirror_geometry(self):
        m = Mirror(id=1, segment=((0.0, 0.0), (2.0, 0.0)), facing=(0, 1),
                   curvature=Curvature("convex", radius=2.0, facet_count=6))
        facets = m.facets()
        assert len(facets) == 6
        assert facets[0].a == pytest.approx((0.0, 0.0))
        assert facets[-1].b == pytest.approx((2.0, 0.0))
        center_y = -math.sqrt(2.0 ** 2 - 1.0 ** 2)
        for f in facets:
            mid = ((f.a[0] + f.b[0]) / 2, (f.a[1] + f.b[1]) / 2)
            out = (mid[0] - 1.0, mid[1] - center_y)
            n = math.hypot(*out)
            assert f.normal == pytest.approx((out[0] / n, out[1] / n), abs=1e-12)
            # bulge reaches toward the reflective side
            assert f.a[1] >= -1e-12

    def test_convex_mirror_widens_angular_coverage(self):
        # a wide-angle (convex) mirror fans reflected rays outward: it lights
        # a side-wall band the flat mirror's straight-back wedge cannot reach
        plan = scenes.square_room(side=8.0)
        cam = Camera(position=(4.0, 6.0), yaw=-math.pi / 2, fov=TWO_PI)
        seg = ((3.2, 0.4), (4.8, 0.4))
        flat = Mirror(id=1, segment=seg, facing=(0, 1))
        convex = Mirror(id=1, segment=seg, facing=(0, 1),
                        curvature=Curvature("convex", radius=1.2, facet_count=8))
        pts = scenes.sample_free_points(plan, 8000, seed=3)
        side = (pts[:, 0] < 1.5) & (pts[:, 1] > 0.8) & (pts[:, 1] < 3.0)
        assert side.sum() > 100
        assert mirror_visible_mask(pts[side], cam, flat, plan).sum() == 0
        assert mirror_visible_mask(pts[side], cam, convex, plan).sum() > 50

    def test_direct_predicate_matches_oracle(self):
        for seed in range(4):
            scene = scenes.random_room_scene(seed)
            pts = scenes.sample_free_points(scene.plan, 3000, seed=seed + 50)
            pred = direct_visible_mask(pts, scene.camera, scene.plan)
            oracle = oracles.direct_visible_points(
                scene.camera.position, scene.camera.yaw, scene.camera.fov,
                oracles.walls_of(scene.plan), pts)
            assert (pred == oracle).mean() >= 0.99
