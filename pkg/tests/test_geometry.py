"""Unit tests for the closed-form stereo geometry."""

from __future__ import annotations

import math
import random

import pytest

from hmdgeom.geometry import (
    CONVERGED,
    DIVERGED,
    LEFT,
    RIGHT,
    CustomOffsets,
    DegenerateRayError,
    DirectPassthrough,
    EyeRelief,
    FixationBehindEyeError,
    HmdGeometry,
    IpdIad,
    Point3,
    PointBehindCameraError,
    ViewerGeometry,
    apply_ocular_parallax,
    midpoint,
    no_error,
    perceive_point,
    perceive_scene,
    project_to_display,
    resolve_offsets,
    scenario,
    triangulate,
)

HMD = HmdGeometry(iad=0.064, vid=1.3)
VIEWER = ViewerGeometry.at_cops(HMD)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def onaxis_ipd_iad_z(d: float, iad: float, ipd: float, vid: float) -> float:
    """Hand-derived on-axis percept depth for an IAD/IPD mismatch."""
    return vid * ipd * d / (iad * (vid - d) + ipd * d)


def onaxis_eye_relief_z(d: float, e: float, vid: float) -> float:
    """Hand-derived on-axis percept depth (HMD frame) for an eye-relief shift."""
    return d + e * (1.0 - d / vid)


def brute_force_closest(oa, da, ob, db, span=4.0, rounds=6, n=81):
    """Grid-refinement minimization of inter-line distance; independent of the
    closed-form solver it checks."""
    best = (None, None, float("inf"))
    ta_center, tb_center, width = 0.0, 0.0, span
    for _ in range(rounds):
        ta_grid = [ta_center + width * (i / (n - 1) - 0.5) for i in range(n)]
        tb_grid = [tb_center + width * (i / (n - 1) - 0.5) for i in range(n)]
        for ta in ta_grid:
            pa = (oa[0] + ta * da[0], oa[1] + ta * da[1], oa[2] + ta * da[2])
            for tb in tb_grid:
                pb = (ob[0] + tb * db[0], ob[1] + tb * db[1], ob[2] + tb * db[2])
                dist = math.dist(pa, pb)
                if dist < best[2]:
                    best = (ta, tb, dist)
        ta_center, tb_center, _ = best
        width /= 8.0
    ta, tb, dist = best
    mid = tuple((oa[i] + ta * da[i] + ob[i] + tb * db[i]) / 2.0 for i in range(3))
    return mid, dist


# ---------------------------------------------------------------------------
# project_to_display
# ---------------------------------------------------------------------------


class TestProjectToDisplay:
    def test_point_on_display_plane_maps_to_itself(self):
        q = project_to_display(Point3(0, 0, 1.3), LEFT, HMD)
        assert q.x == pytest.approx(0.0, abs=1e-15)
        assert q.y == 0.0
        assert q.z == 1.3

    def test_similar_triangles_value(self):
        # hand calculation: -0.032 + 0.032 * (1.3 / 0.5) = 0.0512
        q = project_to_display(Point3(0, 0, 0.5), LEFT, HMD)
        assert q.x == pytest.approx(0.0512, abs=1e-12)
        assert q.z == 1.3

    def test_displaced_camera_value(self):
        # hand calculation with the camera at z = 0.055:
        # -0.032 + 0.032 * (1.3 / 0.445) = 0.06148314...
        q = project_to_display(Point3(0, 0, 0.5), LEFT, HMD, Point3(0, 0, 0.055))
        assert q.x == pytest.approx(0.06148314606741573, abs=1e-9)

    def test_output_is_collinear_with_camera_ray_from_cop(self):
        """(Q - CoP) must be parallel to (target - camera)."""
        target = Point3(0.11, -0.07, 0.9)
        offset = Point3(0.004, -0.002, 0.03)
        q = project_to_display(target, RIGHT, HMD, offset)
        cop = HMD.right_cop
        camera = cop + offset
        ray = target - camera
        anchored = q - cop
        cross = (ray.y * anchored.z - ray.z * anchored.y,
                 ray.z * anchored.x - ray.x * anchored.z,
                 ray.x * anchored.y - ray.y * anchored.x)
        assert max(abs(c) for c in cross) < 1e-12
        assert q.z == HMD.vid

    def test_point_behind_camera_raises(self):
        with pytest.raises(PointBehindCameraError):
            project_to_display(Point3(0, 0, 0.05), LEFT, HMD, Point3(0, 0, 0.1))

    def test_point_at_camera_plane_raises(self):
        with pytest.raises(PointBehindCameraError):
            project_to_display(Point3(0.2, 0, 0.0), LEFT, HMD)


# ---------------------------------------------------------------------------
# triangulate
# ---------------------------------------------------------------------------


class TestTriangulate:
    def test_intersecting_rays(self):
        point, residual, status = triangulate(
            Point3(-0.032, 0, 0), Point3(0, 0, 0.3),
            Point3(0.032, 0, 0), Point3(0, 0, 0.3))
        assert status == CONVERGED
        assert residual == pytest.approx(0.0, abs=1e-15)
        assert point.distance_to(Point3(0, 0, 0.3)) < 1e-12

    def test_parallel_rays_diverge(self):
        point, residual, status = triangulate(
            Point3(-0.032, 0, 0), Point3(-0.032, 0, 1),
            Point3(0.032, 0, 0), Point3(0.032, 0, 1))
        assert status == DIVERGED
        assert point is None
        assert residual == pytest.approx(0.064)

    def test_skew_rays_match_brute_force(self):
        point, residual, status = triangulate(
            Point3(0, 0, 0), Point3(1, 0, 1),
            Point3(0, 0.01, 0), Point3(-1, 0.01, 1))
        assert status == CONVERGED
        assert point.distance_to(Point3(0, 0.005, 0)) < 1e-9
        assert residual == pytest.approx(0.01, abs=1e-9)

        mid, dist = brute_force_closest((0, 0, 0), (1, 0, 1), (0, 0.01, 0), (-1, 0.01, 1))
        assert point.distance_to(Point3(*mid)) < 1e-4
        assert residual == pytest.approx(dist, abs=1e-6)

    def test_random_skew_rays_match_brute_force(self):
        rng = random.Random(7)
        for _ in range(10):
            oa = tuple(rng.uniform(-0.5, 0.5) for _ in range(3))
            ob = tuple(rng.uniform(-0.5, 0.5) for _ in range(3))
            da = tuple(rng.uniform(-1, 1) for _ in range(2)) + (rng.uniform(0.5, 1.5),)
            db = tuple(rng.uniform(-1, 1) for _ in range(2)) + (rng.uniform(0.5, 1.5),)
            point, residual, status = triangulate(
                Point3(*oa), Point3(*[oa[i] + da[i] for i in range(3)]),
                Point3(*ob), Point3(*[ob[i] + db[i] for i in range(3)]))
            mid, dist = brute_force_closest(oa, da, ob, db)
            assert residual == pytest.approx(dist, abs=1e-5)
            if status == CONVERGED:
                assert point.distance_to(Point3(*mid)) < 1e-3

    def test_closest_approach_behind_origin_diverges(self):
        # rays opening away from each other cross behind the origins
        point, residual, status = triangulate(
            Point3(-0.032, 0, 0), Point3(-0.064, 0, 1),
            Point3(0.032, 0, 0), Point3(0.064, 0, 1))
        assert status == DIVERGED
        assert point is None

    def test_zero_length_direction_raises(self):
        with pytest.raises(DegenerateRayError):
            triangulate(Point3(0, 0, 0), Point3(0, 0, 0),
                        Point3(1, 0, 0), Point3(1, 0, 1))


# ---------------------------------------------------------------------------
# perceive_point against the closed-form oracles
# ---------------------------------------------------------------------------


class TestPerceivePoint:
    def test_zero_error_is_identity(self):
        target = Point3(0.08, -0.05, 0.7)
        result = perceive_point(target, HMD, no_error(), VIEWER)
        assert result.status == CONVERGED
        assert result.perceived_hmd.distance_to(target) < 1e-9

    def test_passthrough_shifts_by_exactly_dz(self):
        result = perceive_point(Point3(0, 0, 0.5), HMD, DirectPassthrough(0.055), VIEWER)
        assert result.perceived_hmd.distance_to(Point3(0, 0, 0.445)) < 1e-9

    def test_ipd_iad_matches_oracle(self):
        hmd, spec, viewer = scenario("ipd-iad", -0.012, ipd=0.064, vid=1.3)
        result = perceive_point(Point3(0, 0, 0.5), hmd, spec, viewer)
        expected = onaxis_ipd_iad_z(0.5, iad=0.052, ipd=0.064, vid=1.3)
        assert expected == pytest.approx(0.5652173913043478)
        assert result.perceived_hmd.z == pytest.approx(expected, abs=1e-9)
        assert abs(result.perceived_hmd.x) < 1e-12

    def test_eye_relief_matches_oracle_in_both_frames(self):
        hmd, spec, viewer = scenario("eye-relief", 0.03, ipd=0.064, vid=1.3)
        result = perceive_point(Point3(0, 0, 0.3), hmd, spec, viewer)
        assert result.perceived_hmd.z == pytest.approx(
            onaxis_eye_relief_z(0.3, 0.03, 1.3), abs=1e-9)
        assert result.perceived_hmd.z == pytest.approx(0.3230769230769231, abs=1e-9)
        assert result.perceived_egocentric.z == pytest.approx(0.2930769230769231, abs=1e-9)

    def test_onaxis_closed_forms_over_depth_sweep(self):
        for i in range(57):
            d = 0.2 + i * (3.0 - 0.2) / 56
            hmd, spec, viewer = scenario("ipd-iad", 0.009, ipd=0.064, vid=1.3)
            got = perceive_point(Point3(0, 0, d), hmd, spec, viewer)
            assert got.perceived_hmd.z == pytest.approx(
                onaxis_ipd_iad_z(d, iad=0.073, ipd=0.064, vid=1.3), abs=1e-9)

            hmd, spec, viewer = scenario("eye-relief", -0.02, ipd=0.064, vid=1.3)
            got = perceive_point(Point3(0, 0, d), hmd, spec, viewer)
            assert got.perceived_hmd.z == pytest.approx(
                onaxis_eye_relief_z(d, -0.02, 1.3), abs=1e-9)

    def test_canonical_specs_match_their_custom_form(self):
        """Every canonical variant must be expressible as CustomOffsets."""
        target = Point3(0.05, 0.02, 0.8)
        specs = [DirectPassthrough(0.04), IpdIad(-0.01), EyeRelief(0.025)]
        for spec in specs:
            custom = resolve_offsets(spec)
            a = perceive_point(target, HMD, spec, VIEWER)
            b = perceive_point(target, HMD, custom, VIEWER)
            assert a == b

    def test_behind_camera_propagates(self):
        with pytest.raises(PointBehindCameraError):
            perceive_point(Point3(0, 0, 0.03), HMD, DirectPassthrough(0.055), VIEWER)

    def test_uncrossable_disparity_reports_diverged(self):
        hmd, spec, viewer = scenario("ipd-iad", 0.05, ipd=0.064, vid=1.3)
        result = perceive_point(Point3(0, 0, 5.0), hmd, spec, viewer)
        assert result.status == DIVERGED
        assert result.perceived_hmd is None
        assert result.perceived_egocentric is None


class TestPerceiveScene:
    def test_matches_spec_onaxis_triplet(self):
        hmd, spec, viewer = scenario("ipd-iad", -0.012, ipd=0.064, vid=1.3)
        targets = [Point3(0, 0, d) for d in (0.5, 1.3, 2.5)]
        results = perceive_scene(targets, hmd, spec, viewer)
        expected = [0.5652173913043478, 1.3, 2.1311475409836067]
        for res, want in zip(results, expected):
            assert res.perceived_hmd.z == pytest.approx(want, abs=1e-9)

    def test_zero_error_grid_unchanged(self):
        targets = [Point3(x, 0, z) for x in (-0.2, 0.0, 0.2) for z in (0.4, 1.0, 2.0)]
        results = perceive_scene(targets, HMD, no_error(), VIEWER)
        for target, res in zip(targets, results):
            assert res.perceived_hmd.distance_to(target) < 1e-9

    def test_passthrough_grid_is_world_translation(self):
        dz = 0.04
        targets = [Point3(x, y, z) for x in (-0.25, 0.1) for y in (-0.1, 0.15)
                   for z in (0.5, 1.7)]
        results = perceive_scene(targets, HMD, DirectPassthrough(dz), VIEWER)
        for target, res in zip(targets, results):
            assert res.perceived_hmd.distance_to(target - Point3(0, 0, dz)) < 1e-9

    def test_empty_scene_rejected(self):
        with pytest.raises(ValueError):
            perceive_scene([], HMD, no_error(), VIEWER)

    def test_per_point_failure_does_not_abort(self):
        targets = [Point3(0, 0, 0.03), Point3(0, 0, 0.5)]
        results = perceive_scene(targets, HMD, DirectPassthrough(0.055), VIEWER)
        assert results[0].status == DIVERGED
        assert results[0].perceived_hmd is None
        assert results[1].status == CONVERGED

    def test_order_independent(self):
        """Results are elementwise, so any enumeration order agrees."""
        targets = [Point3(x, 0, z) for x in (-0.3, 0.0, 0.3) for z in (0.4, 1.3, 2.2)]
        spec = IpdIad(-0.012)
        forward = perceive_scene(targets, HMD, spec, VIEWER)
        shuffled_idx = list(range(len(targets)))
        random.Random(3).shuffle(shuffled_idx)
        shuffled = perceive_scene([targets[i] for i in shuffled_idx], HMD, spec, VIEWER)
        for pos, idx in enumerate(shuffled_idx):
            assert shuffled[pos] == forward[idx]


# ---------------------------------------------------------------------------
# ocular parallax
# ---------------------------------------------------------------------------


class TestOcularParallax:
    def test_zero_offset_returns_input(self):
        assert apply_ocular_parallax(VIEWER, Point3(0, 0, 1.0)) is VIEWER

    def test_forward_gaze_moves_cop_forward(self):
        viewer = ViewerGeometry(ipd=0.064, left_eye=Point3(0, 0, 0),
                                right_eye=Point3(0.064, 0, 0), parallax_offset=0.005)
        shifted = apply_ocular_parallax(viewer, Point3(0, 0, 10.0))
        assert shifted.left_eye.distance_to(Point3(0, 0, 0.005)) < 1e-6
        assert shifted.parallax_offset == 0.0

    def test_lateral_gaze_displacement(self):
        viewer = ViewerGeometry(ipd=0.064, left_eye=Point3(0, 0, 0),
                                right_eye=Point3(0.064, 0, 0), parallax_offset=0.005)
        # fixation at 45 degrees in the x-z plane from the left eye
        shifted = apply_ocular_parallax(viewer, Point3(5.0, 0, 5.0))
        expected = 0.005 * math.sqrt(0.5)
        assert shifted.left_eye.x == pytest.approx(expected, abs=1e-6)
        assert shifted.left_eye.z == pytest.approx(expected, abs=1e-6)

    def test_fixation_behind_eye_raises(self):
        viewer = ViewerGeometry(ipd=0.064, left_eye=Point3(0, 0, 0),
                                right_eye=Point3(0.064, 0, 0), parallax_offset=0.005)
        with pytest.raises(FixationBehindEyeError):
            apply_ocular_parallax(viewer, Point3(0, 0, -1.0))

    def test_fixated_point_is_perceived_correctly(self):
        """Per-point fixation makes the displaced CoPs collinear with the
        fixated target, so the fixated point itself is never distorted."""
        viewer = ViewerGeometry.at_cops(HMD, parallax_offset=0.005)
        target = Point3(0.3, 0.0, 0.6)
        result = perceive_point(target, HMD, no_error(), viewer)
        assert result.perceived_hmd.distance_to(target) < 1e-9

    def test_fixed_fixation_distorts_other_points(self):
        """Baking a fixation via apply_ocular_parallax yields a genuine
        viewing error for non-fixated points away from the display plane."""
        viewer = ViewerGeometry.at_cops(HMD, parallax_offset=0.005)
        gazing = apply_ocular_parallax(viewer, Point3(-0.4, 0.0, 0.5))
        on_plane = Point3(0.3, 0.1, HMD.vid)
        result = perceive_point(on_plane, HMD, no_error(), gazing)
        assert result.perceived_hmd.distance_to(on_plane) < 1e-9
        off_plane = Point3(0.3, 0.0, 0.6)
        result = perceive_point(off_plane, HMD, no_error(), gazing)
        assert result.perceived_hmd.distance_to(off_plane) > 1e-5


# ---------------------------------------------------------------------------
# randomized invariants (small versions; the >=1000-case suites live in
# test_acceptance.py)
# ---------------------------------------------------------------------------


def _random_target(rng, z_lo=0.2, z_hi=5.0):
    return Point3(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), rng.uniform(z_lo, z_hi))


class TestInvariants:
    def test_identity(self):
        rng = random.Random(11)
        for _ in range(200):
            target = _random_target(rng)
            res = perceive_point(target, HMD, no_error(), VIEWER)
            assert res.perceived_hmd.distance_to(target) < 1e-9

    def test_viewing_errors_fix_the_display_plane(self):
        rng = random.Random(12)
        for _ in range(200):
            if rng.random() < 0.5:
                family, mag = "ipd-iad", rng.uniform(-0.012, 0.012)
            else:
                family, mag = "eye-relief", rng.uniform(-0.03, 0.03)
            hmd, spec, viewer = scenario(family, mag, ipd=0.064, vid=1.3)
            target = Point3(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), hmd.vid)
            res = perceive_point(target, hmd, spec, viewer)
            assert res.perceived_hmd.distance_to(target) < 1e-9

    def test_rendering_errors_are_vid_invariant(self):
        rng = random.Random(13)
        for _ in range(100):
            dz = rng.uniform(-0.05, 0.055)
            target = _random_target(rng, z_lo=0.3, z_hi=4.0)
            percepts = []
            for vid in (0.8, 1.3, 2.0):
                hmd = HmdGeometry(iad=0.064, vid=vid)
                viewer = ViewerGeometry.at_cops(hmd)
                percepts.append(perceive_point(target, hmd, DirectPassthrough(dz),
                                               viewer).perceived_hmd)
            assert percepts[0].distance_to(percepts[1]) < 1e-9
            assert percepts[1].distance_to(percepts[2]) < 1e-9

    def test_common_render_offset_is_world_translation(self):
        rng = random.Random(14)
        for _ in range(200):
            shift = Point3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                           rng.uniform(-0.05, 0.05))
            spec = CustomOffsets(render_left=shift, render_right=shift)
            target = _random_target(rng, z_lo=0.3)
            res = perceive_point(target, HMD, spec, VIEWER)
            assert res.perceived_hmd.distance_to(target - shift) < 1e-9

    def test_mirror_symmetry(self):
        rng = random.Random(15)
        for _ in range(200):
            def rand_offset():
                return Point3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                              rng.uniform(-0.02, 0.02))
            rl, rr, vl, vr = (rand_offset() for _ in range(4))
            spec = CustomOffsets(rl, rr, vl, vr)
            mirrored = CustomOffsets(rr.mirrored_x(), rl.mirrored_x(),
                                     vr.mirrored_x(), vl.mirrored_x())
            target = _random_target(rng, z_lo=0.4)
            a = perceive_point(target, HMD, spec, VIEWER)
            b = perceive_point(target.mirrored_x(), HMD, mirrored, VIEWER)
            if a.status == CONVERGED and b.status == CONVERGED:
                assert b.perceived_hmd.distance_to(a.perceived_hmd.mirrored_x()) < 1e-9

    def test_coplanar_offsets_leave_zero_residual(self):
        rng = random.Random(16)
        hits = 0
        for _ in range(200):
            def flat_offset():
                return Point3(rng.uniform(-0.02, 0.02), 0.0, rng.uniform(-0.02, 0.02))
            spec = CustomOffsets(flat_offset(), flat_offset(), flat_offset(), flat_offset())
            target = Point3(rng.uniform(-0.5, 0.5), 0.0, rng.uniform(0.4, 3.0))
            res = perceive_point(target, HMD, spec, VIEWER)
            if res.status == CONVERGED:
                hits += 1
                assert res.residual < 1e-12
        assert hits > 150

    def test_egocentric_consistency_is_exact(self):
        """perceived_egocentric is componentwise perceived_hmd minus the
        cyclopean position of the actual eyes, bit for bit."""
        rng = random.Random(17)
        for _ in range(200):
            mag = rng.uniform(-0.03, 0.03)
            hmd, spec, viewer = scenario("eye-relief", mag, ipd=0.064, vid=1.3)
            target = _random_target(rng, z_lo=0.3)
            res = perceive_point(target, hmd, spec, viewer)
            if res.status != CONVERGED:
                continue
            eye_shift = Point3(0, 0, mag)
            cyclopean = midpoint(viewer.left_eye + eye_shift, viewer.right_eye + eye_shift)
            assert res.perceived_egocentric == res.perceived_hmd - cyclopean


# ---------------------------------------------------------------------------
# type validation
# ---------------------------------------------------------------------------


class TestValidation:
    def test_point_requires_finite_components(self):
        with pytest.raises(ValueError):
            Point3(float("nan"), 0, 0)
        with pytest.raises(ValueError):
            Point3(0, float("inf"), 0)

    def test_hmd_requires_positive_dimensions(self):
        with pytest.raises(ValueError):
            HmdGeometry(iad=0.0, vid=1.3)
        with pytest.raises(ValueError):
            HmdGeometry(iad=0.064, vid=-1.0)

    def test_viewer_requires_positive_ipd(self):
        with pytest.raises(ValueError):
            ViewerGeometry(ipd=0.0, left_eye=Point3(0, 0, 0), right_eye=Point3(0.06, 0, 0))

    def test_viewer_rejects_negative_parallax(self):
        with pytest.raises(ValueError):
            ViewerGeometry.at_cops(HMD, parallax_offset=-0.001)

    def test_scenario_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            scenario("magnify", 0.1, ipd=0.064, vid=1.3)

    def test_zero_error_viewer_eyes_sit_at_cops(self):
        hmd, _, viewer = scenario("none", 0.0, ipd=0.064, vid=1.3)
        assert viewer.left_eye == hmd.left_cop
        assert viewer.right_eye == hmd.right_cop
