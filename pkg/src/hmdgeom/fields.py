"""Batch prediction products: distortion fields and reach-bias tables.

A distortion field maps a planar grid of intended scene points to their
model-predicted perceived positions under one error configuration. A
prediction table lists, per error magnitude, the egocentric perceived
distance of an on-axis target and the implied reach bias. Exports are
deterministic: row-major grid order and 9-significant-digit numbers, so
re-exporting identical inputs is byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from typing import Sequence

from .geometry import (
    CONVERGED,
    ErrorSpec,
    HmdGeometry,
    PerceptionResult,
    Point3,
    ViewerGeometry,
    perceive_point,
    perceive_scene,
    scenario,
)
from .jsonfmt import dumps, format_sig

# Default slice mirrors the usual working volume in front of a headset:
# a 1 m wide strip from 0.2 m to 3 m at eye height.
DEFAULT_GRID = dict(x_min=-0.5, x_max=0.5, nx=21, z_min=0.2, z_max=3.0, nz=29, y=0.0)

FIELD_CSV_HEADER = ("intended_x_m,intended_y_m,intended_z_m,"
                    "perceived_hmd_x_m,perceived_hmd_y_m,perceived_hmd_z_m,"
                    "perceived_ego_x_m,perceived_ego_y_m,perceived_ego_z_m,"
                    "residual_m,status")
TABLE_CSV_HEADER = "family,magnitude_m,target_m,perceived_ego_m,bias_m"


@dataclass(frozen=True)
class FieldGrid:
    """Regular x-z grid at a fixed y slice. Enumeration is row-major with x
    varying slowest."""

    x_min: float
    x_max: float
    nx: int
    z_min: float
    z_max: float
    nz: int
    y: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.nz < 2:
            raise ValueError(f"grid counts must be >= 2, got nx={self.nx}, nz={self.nz}")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.z_min < self.z_max:
            raise ValueError(f"need z_min < z_max, got [{self.z_min}, {self.z_max}]")
        if not self.z_min > 0:
            raise ValueError(f"all grid z must be positive, got z_min={self.z_min}")
        for name in ("x_min", "x_max", "z_min", "z_max", "y"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def x_values(self) -> list[float]:
        step = (self.x_max - self.x_min) / (self.nx - 1)
        return [self.x_min + i * step for i in range(self.nx)]

    def z_values(self) -> list[float]:
        step = (self.z_max - self.z_min) / (self.nz - 1)
        return [self.z_min + k * step for k in range(self.nz)]

    def points(self) -> list[Point3]:
        return [Point3(x, self.y, z) for x in self.x_values() for z in self.z_values()]

    def to_payload(self) -> dict:
        return {"x_min_m": self.x_min, "x_max_m": self.x_max, "nx": self.nx,
                "z_min_m": self.z_min, "z_max_m": self.z_max, "nz": self.nz,
                "y_m": self.y}


@dataclass(frozen=True)
class DistortionField:
    """Parallel per-point arrays of intended and perceived positions."""

    grid: FieldGrid
    intended: tuple[Point3, ...]
    results: tuple[PerceptionResult, ...]

    def __post_init__(self):
        if len(self.intended) != len(self.results):
            raise ValueError("intended and results must have equal lengths")

    def to_payload(self) -> dict:
        points = []
        for target, res in zip(self.intended, self.results):
            points.append({
                "intended": target.as_list(),
                "perceived_hmd": res.perceived_hmd.as_list() if res.perceived_hmd else None,
                "perceived_ego": res.perceived_egocentric.as_list() if res.perceived_egocentric else None,
                "residual": res.residual,
                "status": res.status,
            })
        return {"grid": self.grid.to_payload(), "points": points}


@dataclass(frozen=True)
class PredictionRow:
    family: str
    magnitude: float
    target: float
    perceived_ego: float | None
    bias: float | None
    status: str


@dataclass(frozen=True)
class PredictionTable:
    rows: tuple[PredictionRow, ...]

    def to_payload(self) -> dict:
        return {"rows": [{"family": r.family, "magnitude_m": r.magnitude,
                          "target_m": r.target, "perceived_ego_m": r.perceived_ego,
                          "bias_m": r.bias, "status": r.status} for r in self.rows]}


def generate_field(grid: FieldGrid, hmd: HmdGeometry, errors: ErrorSpec,
                   viewer: ViewerGeometry) -> DistortionField:
    """Perceive every grid point; diverged points are kept with their status."""
    targets = grid.points()
    results = perceive_scene(targets, hmd, errors, viewer)
    return DistortionField(grid=grid, intended=tuple(targets), results=tuple(results))


def predict_reach_bias(family: str, magnitudes: Sequence[float], target: float,
                       hmd: HmdGeometry, viewer: ViewerGeometry) -> PredictionTable:
    """Egocentric perceived distance and reach bias of an on-axis target.

    Bias is perceived minus intended. The scenario is rebuilt per magnitude
    from the viewer's IPD and the headset VID (for ipd-iad the headset IAD
    is ipd + magnitude); diverged magnitudes yield flagged rows.
    """
    if not target > 0:
        raise ValueError(f"target must be positive, got {target}")
    point = Point3(0.0, 0.0, target)
    rows = []
    for magnitude in magnitudes:
        mag_hmd, spec, mag_viewer = scenario(
            family, magnitude, ipd=viewer.ipd, vid=hmd.vid,
            parallax_offset=viewer.parallax_offset)
        result = perceive_point(point, mag_hmd, spec, mag_viewer)
        if result.status == CONVERGED:
            perceived = result.perceived_egocentric.norm()
            rows.append(PredictionRow(family, magnitude, target, perceived,
                                      perceived - target, CONVERGED))
        else:
            rows.append(PredictionRow(family, magnitude, target, None, None, result.status))
    return PredictionTable(tuple(rows))


def _field_csv(field: DistortionField) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FIELD_CSV_HEADER.split(","))
    for target, res in zip(field.intended, field.results):
        hmd_cells = (res.perceived_hmd.as_list() if res.perceived_hmd else [None] * 3)
        ego_cells = (res.perceived_egocentric.as_list() if res.perceived_egocentric else [None] * 3)
        cells = target.as_list() + hmd_cells + ego_cells + [res.residual]
        writer.writerow([format_sig(c) if c is not None else "" for c in cells]
                        + [res.status])
    return buffer.getvalue()


def _table_csv(table: PredictionTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_CSV_HEADER.split(","))
    for r in table.rows:
        writer.writerow([
            r.family, format_sig(r.magnitude), format_sig(r.target),
            format_sig(r.perceived_ego) if r.perceived_ego is not None else "",
            format_sig(r.bias) if r.bias is not None else "",
        ])
    return buffer.getvalue()


def render_export(obj: DistortionField | PredictionTable, fmt: str) -> str:
    """Serialize a field or table to JSON/CSV text."""
    if fmt == "json":
        return dumps(obj.to_payload()) + "\n"
    if fmt == "csv":
        return _field_csv(obj) if isinstance(obj, DistortionField) else _table_csv(obj)
    raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")


def export_field(obj: DistortionField | PredictionTable, fmt: str,
                 destination: str | os.PathLike) -> None:
    """Write a field or table to a file; OSError propagates on IO failure."""
    text = render_export(obj, fmt)
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
