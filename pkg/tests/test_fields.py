"""Unit tests for distortion fields, reach-bias tables and exports."""

from __future__ import annotations

import json

import pytest

from hmdgeom.fields import (
    DEFAULT_GRID,
    FIELD_CSV_HEADER,
    TABLE_CSV_HEADER,
    FieldGrid,
    export_field,
    generate_field,
    predict_reach_bias,
    render_export,
)
from hmdgeom.geometry import (
    CONVERGED,
    DIVERGED,
    DirectPassthrough,
    EyeRelief,
    HmdGeometry,
    IpdIad,
    Point3,
    ViewerGeometry,
    no_error,
    scenario,
)

HMD = HmdGeometry(iad=0.064, vid=1.3)
VIEWER = ViewerGeometry.at_cops(HMD)
SMALL_GRID = FieldGrid(x_min=-0.2, x_max=0.2, nx=3, z_min=0.4, z_max=2.2, nz=4)


def _analytic_bias_slope(family: str, d: float, ipd: float, vid: float) -> float:
    """Hand-derived derivatives of the on-axis closed forms at zero error."""
    if family == "passthrough":
        return -1.0
    if family == "eye-relief":
        return -d / vid
    if family == "ipd-iad":
        return -d * (vid - d) / (ipd * vid)
    raise ValueError(family)


class TestGenerateField:
    def test_zero_error_field_is_identity(self):
        field = generate_field(SMALL_GRID, HMD, no_error(), VIEWER)
        assert len(field.intended) == SMALL_GRID.nx * SMALL_GRID.nz
        for target, res in zip(field.intended, field.results):
            assert res.status == CONVERGED
            assert res.perceived_hmd.distance_to(target) < 1e-9

    def test_viewing_error_fixes_the_display_plane_row(self):
        grid = FieldGrid(x_min=-0.4, x_max=0.4, nx=5, z_min=0.4, z_max=2.2, nz=4)
        vid_grid = FieldGrid(x_min=-0.4, x_max=0.4, nx=5, z_min=HMD.vid, z_max=2.0, nz=2)
        for spec in (EyeRelief(0.03), IpdIad(-0.012)):
            field = generate_field(vid_grid, HMD, spec, VIEWER)
            for target, res in zip(field.intended, field.results):
                if target.z == HMD.vid:
                    assert res.perceived_hmd.distance_to(target) < 1e-9

    def test_passthrough_fields_identical_across_vids(self):
        grid = SMALL_GRID
        fields = []
        for vid in (0.8, 2.0):
            hmd = HmdGeometry(iad=0.064, vid=vid)
            fields.append(generate_field(grid, hmd, DirectPassthrough(0.055),
                                         ViewerGeometry.at_cops(hmd)))
        for a, b in zip(fields[0].results, fields[1].results):
            assert a.perceived_hmd.distance_to(b.perceived_hmd) < 1e-9

    def test_diverged_points_are_kept(self):
        grid = FieldGrid(x_min=-0.1, x_max=0.1, nx=2, z_min=3.0, z_max=6.0, nz=3)
        hmd, spec, viewer = scenario("ipd-iad", 0.05, ipd=0.064, vid=1.3)
        field = generate_field(grid, hmd, spec, viewer)
        statuses = {res.status for res in field.results}
        assert DIVERGED in statuses
        assert len(field.results) == 6


class TestPredictReachBias:
    def test_passthrough_slope_is_exactly_minus_one(self):
        table = predict_reach_bias("passthrough", [-0.055, 0.055], 0.30, HMD, VIEWER)
        rows = table.rows
        assert rows[0].bias == pytest.approx(0.055, abs=1e-9)
        assert rows[1].bias == pytest.approx(-0.055, abs=1e-9)
        slope = (rows[1].bias - rows[0].bias) / (rows[1].magnitude - rows[0].magnitude)
        assert slope == pytest.approx(-1.0, abs=1e-9)

    def test_eye_relief_slope_matches_analytic(self):
        table = predict_reach_bias("eye-relief", [-0.03, 0.03], 0.30, HMD, VIEWER)
        rows = table.rows
        slope = (rows[1].bias - rows[0].bias) / (rows[1].magnitude - rows[0].magnitude)
        assert slope == pytest.approx(-0.30 / 1.3, rel=1e-9)

    def test_finite_difference_slopes_match_analytic_derivatives(self):
        h = 1e-5
        for family in ("passthrough", "eye-relief", "ipd-iad"):
            table = predict_reach_bias(family, [-h, h], 0.30, HMD, VIEWER)
            rows = table.rows
            slope = (rows[1].bias - rows[0].bias) / (2 * h)
            assert slope == pytest.approx(
                _analytic_bias_slope(family, 0.30, 0.064, 1.3), rel=1e-6)

    def test_ipd_iad_magnitude_from_closed_form(self):
        slope = _analytic_bias_slope("ipd-iad", 0.30, 0.064, 1.3)
        assert slope == pytest.approx(-3.6058, abs=1e-4)

    def test_diverged_rows_flagged(self):
        table = predict_reach_bias("ipd-iad", [0.05], 5.0, HMD, VIEWER)
        row = table.rows[0]
        assert row.status == DIVERGED
        assert row.perceived_ego is None and row.bias is None

    def test_rejects_nonpositive_target(self):
        with pytest.raises(ValueError):
            predict_reach_bias("passthrough", [0.0], -0.1, HMD, VIEWER)


class TestExport:
    def test_field_json_schema(self, tmp_path):
        field = generate_field(SMALL_GRID, HMD, no_error(), VIEWER)
        path = tmp_path / "field.json"
        export_field(field, "json", path)
        body = json.loads(path.read_text())
        assert set(body) == {"grid", "points"}
        assert len(body["points"]) == 12
        point = body["points"][0]
        assert set(point) == {"intended", "perceived_hmd", "perceived_ego",
                              "residual", "status"}
        assert point["status"] == "converged"
        assert point["intended"] == [-0.2, 0.0, 0.4]

    def test_zero_error_json_pairs_are_identical(self, tmp_path):
        grid = FieldGrid(x_min=-0.1, x_max=0.1, nx=2, z_min=0.5, z_max=1.0, nz=2)
        field = generate_field(grid, HMD, no_error(), VIEWER)
        body = json.loads(render_export(field, "json"))
        for point in body["points"]:
            assert point["intended"] == pytest.approx(point["perceived_hmd"], abs=1e-8)

    def test_diverged_point_serializes_null_coordinates(self):
        grid = FieldGrid(x_min=-0.1, x_max=0.1, nx=2, z_min=4.0, z_max=6.0, nz=2)
        hmd, spec, viewer = scenario("ipd-iad", 0.05, ipd=0.064, vid=1.3)
        body = json.loads(render_export(generate_field(grid, hmd, spec, viewer), "json"))
        diverged = [p for p in body["points"] if p["status"] == "diverged"]
        assert diverged
        assert diverged[0]["perceived_hmd"] is None
        assert diverged[0]["perceived_ego"] is None

    def test_reexport_is_byte_identical(self, tmp_path):
        field = generate_field(SMALL_GRID, HMD, EyeRelief(0.03), VIEWER)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        export_field(field, "json", a)
        export_field(field, "json", b)
        assert a.read_bytes() == b.read_bytes()
        c, d = tmp_path / "c.csv", tmp_path / "d.csv"
        export_field(field, "csv", c)
        export_field(field, "csv", d)
        assert c.read_bytes() == d.read_bytes()

    def test_field_csv_header(self, tmp_path):
        field = generate_field(SMALL_GRID, HMD, no_error(), VIEWER)
        path = tmp_path / "field.csv"
        export_field(field, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == FIELD_CSV_HEADER
        assert len(lines) == 1 + 12

    def test_table_csv_header_contract(self, tmp_path):
        table = predict_reach_bias("eye-relief", [-0.03, 0.0, 0.03], 0.30, HMD, VIEWER)
        path = tmp_path / "table.csv"
        export_field(table, "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == "family,magnitude_m,target_m,perceived_ego_m,bias_m"
        assert lines[0] == TABLE_CSV_HEADER
        assert len(lines) == 4

    def test_nine_significant_digit_policy(self):
        table = predict_reach_bias("ipd-iad", [-0.012], 0.30, HMD, VIEWER)
        body = json.loads(render_export(table, "json"))
        value = body["rows"][0]["perceived_ego_m"]
        assert value == float(f"{value:.9g}")

    def test_unwritable_destination_raises_oserror(self, tmp_path):
        field = generate_field(SMALL_GRID, HMD, no_error(), VIEWER)
        with pytest.raises(OSError):
            export_field(field, "json", tmp_path / "missing" / "field.json")

    def test_unknown_format_rejected(self):
        field = generate_field(SMALL_GRID, HMD, no_error(), VIEWER)
        with pytest.raises(ValueError):
            render_export(field, "yaml")


class TestFieldGridValidation:
    def test_counts_must_be_at_least_two(self):
        with pytest.raises(ValueError):
            FieldGrid(x_min=0, x_max=1, nx=1, z_min=0.5, z_max=1.0, nz=3)

    def test_ranges_must_be_ordered(self):
        with pytest.raises(ValueError):
            FieldGrid(x_min=0.5, x_max=-0.5, nx=3, z_min=0.5, z_max=1.0, nz=3)

    def test_z_must_be_positive(self):
        with pytest.raises(ValueError):
            FieldGrid(x_min=-0.5, x_max=0.5, nx=3, z_min=-0.1, z_max=1.0, nz=3)

    def test_default_grid_shape(self):
        grid = FieldGrid(**DEFAULT_GRID)
        assert grid.nx == 21 and grid.nz == 29
        points = grid.points()
        assert len(points) == 21 * 29
        # row-major with x varying slowest
        assert points[0] == Point3(-0.5, 0.0, 0.2)
        assert points[1].x == points[0].x
        assert points[grid.nz].x != points[0].x
