"""Ray-level simulation of the five-stage quad-reprojection render chain.

Per eye the chain is: (1) a render camera, displaced from the headset CoP by
the rendering error, captures the scene; (2) its framebuffer lands on a quad
in the virtual image plane with the angular transfer anchored at the headset
CoP; (3) a viewing camera at the simulated user CoP (headset CoP plus the
viewing error) re-images that quad; (4) its framebuffer is projected from
the actual user CoP onto a second quad in the same plane; (5) the actual eye
views the second quad. The binocular percept is the triangulation of the two
final rays.

Equivalence to the closed-form model in `geometry` is evaluated in the
egocentric frame. Stages 4-5 re-anchor the simulated-view directions at the
actual eye, so the chain hands the displaced-eye percept to a viewer at the
actual eye position: the percept relative to the viewer is preserved while
HMD-frame coordinates shift by the simulated-to-actual eye offset. When the
actual eye coincides with the simulated CoP, stages 4-5 are the identity and
the frames agree too.

Quads are treated as infinite planes; field-of-view extents enter only as
the anchoring of the angular transfer, never as clipping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .geometry import (
    CONVERGED,
    DIVERGED,
    GEOMETRY_TOL,
    LEFT,
    RIGHT,
    CustomOffsets,
    ErrorSpec,
    HmdGeometry,
    PerceptionResult,
    Point3,
    PointBehindCameraError,
    ViewerGeometry,
    midpoint,
    perceive_point,
    resolve_offsets,
    triangulate,
    ORIGIN,
)

ACTUAL_EYE_AT_COP = "cop"
ACTUAL_EYE_AT_SIMULATED = "simulated"

STAGE_RENDER = "render"
STAGE_SIMULATED_VIEW = "simulated-view"
STAGE_ACTUAL_VIEW = "actual-view"


@dataclass(frozen=True)
class PipelineConfig:
    """One render-chain configuration.

    Offsets are relative to the per-eye headset CoP; actual_eye_* are
    absolute positions (None means the headset CoP itself).
    """

    hmd: HmdGeometry
    render_offset_left: Point3 = ORIGIN
    render_offset_right: Point3 = ORIGIN
    view_offset_left: Point3 = ORIGIN
    view_offset_right: Point3 = ORIGIN
    actual_eye_left: Point3 | None = None
    actual_eye_right: Point3 | None = None

    @classmethod
    def from_error_spec(cls, hmd: HmdGeometry, spec: ErrorSpec,
                        actual_eye_at: str = ACTUAL_EYE_AT_COP) -> "PipelineConfig":
        offsets = resolve_offsets(spec)
        if actual_eye_at == ACTUAL_EYE_AT_COP:
            actual_left, actual_right = hmd.left_cop, hmd.right_cop
        elif actual_eye_at == ACTUAL_EYE_AT_SIMULATED:
            actual_left = hmd.left_cop + offsets.view_left
            actual_right = hmd.right_cop + offsets.view_right
        else:
            raise ValueError(f"actual_eye_at must be 'cop' or 'simulated', got {actual_eye_at!r}")
        return cls(hmd=hmd,
                   render_offset_left=offsets.render_left,
                   render_offset_right=offsets.render_right,
                   view_offset_left=offsets.view_left,
                   view_offset_right=offsets.view_right,
                   actual_eye_left=actual_left,
                   actual_eye_right=actual_right)

    def render_offset(self, side: str) -> Point3:
        return self.render_offset_left if side == LEFT else self.render_offset_right

    def view_offset(self, side: str) -> Point3:
        return self.view_offset_left if side == LEFT else self.view_offset_right

    def actual_eye(self, side: str) -> Point3:
        eye = self.actual_eye_left if side == LEFT else self.actual_eye_right
        return self.hmd.cop(side) if eye is None else eye

    def as_custom_offsets(self) -> CustomOffsets:
        """The closed-form error spec realized by this chain."""
        return CustomOffsets(render_left=self.render_offset_left,
                             render_right=self.render_offset_right,
                             view_left=self.view_offset_left,
                             view_right=self.view_offset_right)


@dataclass(frozen=True)
class PipelineTrace:
    """Stage points for one eye: scene point, first quad, a unit-distance
    sample along the simulated viewing ray, second quad, final percept."""

    scene: Point3
    quad1: Point3
    view_sample: Point3
    quad2: Point3
    perceived: Point3 | None


def _trace_eye(target: Point3, config: PipelineConfig, side: str,
               ) -> tuple[Point3, Point3, Point3, Point3]:
    """Stages 1-4 for one eye; returns (quad1, view_sample, quad2, actual_eye)."""
    hmd = config.hmd
    cop = hmd.cop(side)
    render_cam = cop + config.render_offset(side)
    sim_cop = cop + config.view_offset(side)
    actual = config.actual_eye(side)

    depth = target.z - render_cam.z
    if depth <= GEOMETRY_TOL:
        raise PointBehindCameraError(
            f"target z={target.z} behind {side} render camera at z={render_cam.z}",
            stage=STAGE_RENDER, side=side)
    scale = hmd.vid / depth
    spread = target - render_cam
    quad1 = Point3(cop.x + spread.x * scale, cop.y + spread.y * scale, hmd.vid)

    view_dir = quad1 - sim_cop
    if view_dir.z <= GEOMETRY_TOL:
        raise PointBehindCameraError(
            f"first quad behind {side} simulated viewpoint at z={sim_cop.z}",
            stage=STAGE_SIMULATED_VIEW, side=side)
    view_sample = sim_cop + view_dir.scaled(1.0 / view_dir.norm())

    reach = hmd.vid - actual.z
    if reach <= GEOMETRY_TOL:
        raise PointBehindCameraError(
            f"second quad behind {side} actual eye at z={actual.z}",
            stage=STAGE_ACTUAL_VIEW, side=side)
    t = reach / view_dir.z
    quad2 = Point3(actual.x + view_dir.x * t, actual.y + view_dir.y * t, hmd.vid)
    return quad1, view_sample, quad2, actual


def simulate_pipeline_point(target: Point3, config: PipelineConfig,
                            ) -> tuple[PerceptionResult, dict[str, PipelineTrace]]:
    """Run the five-stage chain for both eyes and triangulate the percept.

    Raises PointBehindCameraError with the failing stage identified when the
    target (or an intermediate quad point) is not in front of a camera.
    """
    quad1_l, sample_l, quad2_l, eye_l = _trace_eye(target, config, LEFT)
    quad1_r, sample_r, quad2_r, eye_r = _trace_eye(target, config, RIGHT)

    point, residual, status = triangulate(eye_l, quad2_l, eye_r, quad2_r)
    cyclopean = midpoint(eye_l, eye_r)
    ego = point - cyclopean if point is not None else None
    result = PerceptionResult(point, ego, residual, status)
    traces = {
        LEFT: PipelineTrace(target, quad1_l, sample_l, quad2_l, point),
        RIGHT: PipelineTrace(target, quad1_r, sample_r, quad2_r, point),
    }
    return result, traces


def canonical_configs(hmd: HmdGeometry,
                      passthrough_dz: float = 0.055,
                      ipd_iad_delta: float = -0.012,
                      eye_relief_e: float = 0.03) -> dict[str, PipelineConfig]:
    """The three canonical error presets as pipeline configurations.

    Passthrough and eye relief keep the actual eye at the headset CoPs;
    ipd-iad places it at the simulated CoP, since a lateral offset between
    the two changes binocular triangulation rather than just shifting the
    frame.
    """
    from .geometry import DirectPassthrough, EyeRelief, IpdIad

    return {
        "passthrough": PipelineConfig.from_error_spec(
            hmd, DirectPassthrough(passthrough_dz), ACTUAL_EYE_AT_COP),
        "ipd-iad": PipelineConfig.from_error_spec(
            hmd, IpdIad(ipd_iad_delta), ACTUAL_EYE_AT_SIMULATED),
        "eye-relief": PipelineConfig.from_error_spec(
            hmd, EyeRelief(eye_relief_e), ACTUAL_EYE_AT_COP),
    }


@dataclass(frozen=True)
class ConfigDeviation:
    label: str
    max_deviation_m: float
    worst_target: Point3 | None
    n_points: int
    failures: tuple[dict, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class EquivalenceReport:
    """Max |pipeline - closed form| over configs x targets, egocentric frame."""

    max_deviation_m: float
    configs: tuple[ConfigDeviation, ...]
    frame: str = "egocentric"

    def to_payload(self) -> dict:
        return {
            "max_deviation_m": self.max_deviation_m,
            "frame": self.frame,
            "configs": [
                {
                    "label": entry.label,
                    "max_deviation_m": entry.max_deviation_m,
                    "worst_target_m": entry.worst_target.as_list() if entry.worst_target else None,
                    "n_points": entry.n_points,
                    "failures": list(entry.failures),
                }
                for entry in self.configs
            ],
        }


def equivalence_report(configs: Mapping[str, PipelineConfig] | Sequence[PipelineConfig],
                       targets: list[Point3]) -> EquivalenceReport:
    """Compare the chain against the closed-form model over a target grid.

    Configs may be a {label: config} mapping or a plain sequence (labeled by
    index). Per-point failures (a point behind a displaced camera, or a
    diverged triangulation on either side) are surfaced in the report and
    the run completes; deviations are measured over the remaining points.
    """
    if not targets:
        raise ValueError("targets must be non-empty")
    if not isinstance(configs, Mapping):
        configs = {f"config-{i}": config for i, config in enumerate(configs)}
    overall = 0.0
    entries = []
    for label, config in configs.items():
        viewer = ViewerGeometry.at_cops(config.hmd)
        spec = config.as_custom_offsets()
        worst = 0.0
        worst_target = None
        failures: list[dict] = []
        for target in targets:
            try:
                pipe_result, _ = simulate_pipeline_point(target, config)
                closed_result = perceive_point(target, config.hmd, spec, viewer)
            except PointBehindCameraError as exc:
                failures.append({"target_m": target.as_list(),
                                 "stage": exc.stage, "message": str(exc)})
                continue
            if pipe_result.status != CONVERGED or closed_result.status != CONVERGED:
                failures.append({"target_m": target.as_list(),
                                 "stage": "triangulation", "message": DIVERGED})
                continue
            deviation = pipe_result.perceived_egocentric.distance_to(
                closed_result.perceived_egocentric)
            if deviation > worst:
                worst = deviation
                worst_target = target
        entries.append(ConfigDeviation(label=label, max_deviation_m=worst,
                                       worst_target=worst_target,
                                       n_points=len(targets),
                                       failures=tuple(failures)))
        overall = max(overall, worst)
    return EquivalenceReport(max_deviation_m=overall, configs=tuple(entries))
