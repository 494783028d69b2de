"""Request validation and payload building shared by the CLI and HTTP service.

Every operation takes a plain mapping (parsed CLI flags or a JSON body) and
returns a JSON-ready payload, so both surfaces produce identical output for
identical logical requests. All lengths are meters and wire keys carry an
explicit _m suffix. Magnitudes outside the sanity bounds (|render offset|
<= 0.2 m, |view offset| <= 0.1 m) are rejected.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

from . import fields as fieldgen
from .geometry import (
    CONVERGED,
    ERROR_FAMILIES,
    FAMILY_EYE_RELIEF,
    FAMILY_IPD_IAD,
    FAMILY_NONE,
    FAMILY_PASSTHROUGH,
    CustomOffsets,
    DivergedError,
    HmdGeometry,
    Point3,
    PointBehindCameraError,
    perceive_point,
    scenario,
)
from .pipeline import canonical_configs, equivalence_report
from .psychometrics import (
    DegenerateDataError,
    ObserverConfig,
    TrialBin,
    TrialSet,
    bootstrap_fit,
    simulate_2ifc_trials,
)

DEFAULT_IPD = 0.064
DEFAULT_VID = 1.3
RENDER_OFFSET_LIMIT = 0.2
VIEW_OFFSET_LIMIT = 0.1
FAMILY_CUSTOM = "custom"

# Paper-scale preset magnitudes, used when a request omits the magnitude.
DEFAULT_MAGNITUDES = {
    FAMILY_NONE: 0.0,
    FAMILY_PASSTHROUGH: 0.055,
    FAMILY_IPD_IAD: 0.012,
    FAMILY_EYE_RELIEF: 0.03,
}

DEFAULT_SIMULATE_LEVELS = {
    FAMILY_PASSTHROUGH: (-0.055, -0.0275, 0.0, 0.0275, 0.055),
    FAMILY_IPD_IAD: (-0.012, -0.006, 0.0, 0.006, 0.012),
}

PIPELINE_GRID_DEFAULTS = dict(x_min=-0.3, x_max=0.3, nx=5, z_min=0.3, z_max=2.5, nz=5, y=0.0)


class ApiError(Exception):
    """Validation or domain failure with a machine-readable payload."""

    def __init__(self, kind: str, message: str, status: int = 400):
        super().__init__(message)
        self.kind = kind
        self.status = status

    def payload(self) -> dict:
        return {"error": {"type": self.kind, "message": str(self)}}


def _invalid(message: str) -> ApiError:
    return ApiError("InvalidRequest", message, status=400)


def _get_number(params: Mapping, key: str, default=None) -> float:
    if key not in params or params[key] is None:
        if default is None:
            raise _invalid(f"missing required parameter {key!r}")
        return float(default)
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _invalid(f"{key} must be a number, got {value!r}")
    if not math.isfinite(float(value)):
        raise _invalid(f"{key} must be finite, got {value!r}")
    return float(value)


def _get_int(params: Mapping, key: str, default=None, minimum: int | None = None) -> int:
    value = _get_number(params, key, default)
    if value != int(value):
        raise _invalid(f"{key} must be an integer, got {value!r}")
    result = int(value)
    if minimum is not None and result < minimum:
        raise _invalid(f"{key} must be >= {minimum}, got {result}")
    return result


def _get_family(params: Mapping, allowed: Sequence[str]) -> str:
    family = params.get("family", FAMILY_NONE)
    if family not in allowed:
        raise _invalid(f"family must be one of {tuple(allowed)}, got {family!r}")
    return family


def _check_magnitude(family: str, magnitude: float) -> None:
    limit = RENDER_OFFSET_LIMIT if family in (FAMILY_PASSTHROUGH, FAMILY_CUSTOM) else VIEW_OFFSET_LIMIT
    if abs(magnitude) > limit:
        raise _invalid(
            f"magnitude {magnitude} m exceeds the sanity bound of {limit} m for family {family!r}")


def _point_from(params: Mapping, key: str) -> Point3:
    raw = params[key]
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise _invalid(f"{key} must be a [x, y, z] triple")
    try:
        return Point3(float(raw[0]), float(raw[1]), float(raw[2]))
    except (TypeError, ValueError) as exc:
        raise _invalid(f"invalid {key}: {exc}")


def _resolve_scenario(params: Mapping):
    """Common (hmd, spec, viewer) resolution for predict/field requests."""
    family = _get_family(params, ERROR_FAMILIES + (FAMILY_CUSTOM,))
    ipd = _get_number(params, "ipd_m", DEFAULT_IPD)
    vid = _get_number(params, "vid_m", DEFAULT_VID)
    parallax = _get_number(params, "parallax_m", 0.0)
    if not ipd > 0:
        raise _invalid(f"ipd_m must be positive, got {ipd}")
    if not vid > 0:
        raise _invalid(f"vid_m must be positive, got {vid}")
    if parallax < 0:
        raise _invalid(f"parallax_m must be >= 0, got {parallax}")

    if family == FAMILY_CUSTOM:
        offset = _point_from(params, "render_offset_m")
        if max(abs(offset.x), abs(offset.y), abs(offset.z)) > RENDER_OFFSET_LIMIT:
            raise _invalid(
                f"render_offset_m components exceed the sanity bound of {RENDER_OFFSET_LIMIT} m")
        hmd, _, viewer = scenario(FAMILY_NONE, 0.0, ipd, vid, parallax)
        spec = CustomOffsets(render_left=offset, render_right=offset)
        magnitude = offset.z
    else:
        magnitude = _get_number(params, "magnitude_m", DEFAULT_MAGNITUDES[family])
        _check_magnitude(family, magnitude)
        try:
            hmd, spec, viewer = scenario(family, magnitude, ipd, vid, parallax)
        except ValueError as exc:
            raise _invalid(str(exc))
    return family, magnitude, hmd, spec, viewer


def predict(params: Mapping) -> dict:
    """Perceived position of a single target point."""
    family, magnitude, hmd, spec, viewer = _resolve_scenario(params)
    if "target_m" in params:
        target = _point_from(params, "target_m")
    else:
        target = Point3(0.0, 0.0, _get_number(params, "target_z_m", None))
    if not target.z > 0:
        raise _invalid(f"target z must be positive, got {target.z}")

    try:
        result = perceive_point(target, hmd, spec, viewer)
    except PointBehindCameraError as exc:
        raise _invalid(str(exc))
    if result.status != CONVERGED:
        raise ApiError("Diverged", "viewing rays do not cross in front of the eyes", status=422)
    return {
        "family": family,
        "magnitude_m": magnitude,
        "target_m": target.as_list(),
        "perceived_hmd_m": result.perceived_hmd.as_list(),
        "perceived_egocentric_m": result.perceived_egocentric.as_list(),
        "residual_m": result.residual,
        "status": result.status,
    }


def _grid_from(params: Mapping) -> fieldgen.FieldGrid:
    raw = params.get("grid", {})
    if not isinstance(raw, Mapping):
        raise _invalid("grid must be an object")
    defaults = fieldgen.DEFAULT_GRID
    try:
        return fieldgen.FieldGrid(
            x_min=_get_number(raw, "x_min_m", defaults["x_min"]),
            x_max=_get_number(raw, "x_max_m", defaults["x_max"]),
            nx=_get_int(raw, "nx", defaults["nx"], minimum=2),
            z_min=_get_number(raw, "z_min_m", defaults["z_min"]),
            z_max=_get_number(raw, "z_max_m", defaults["z_max"]),
            nz=_get_int(raw, "nz", defaults["nz"], minimum=2),
            y=_get_number(raw, "y_m", defaults["y"]),
        )
    except ValueError as exc:
        raise _invalid(str(exc))


def field_object(params: Mapping) -> fieldgen.DistortionField:
    """Distortion field over a grid, as the domain object (for file exports)."""
    _, _, hmd, spec, viewer = _resolve_scenario(params)
    grid = _grid_from(params)
    return fieldgen.generate_field(grid, hmd, spec, viewer)


def field(params: Mapping) -> dict:
    """Distortion field over a grid; returns the canonical field payload."""
    return field_object(params).to_payload()


def reach_table(params: Mapping) -> dict:
    """Reach-bias prediction table for one family over a magnitude sweep."""
    family = _get_family(params, ERROR_FAMILIES)
    ipd = _get_number(params, "ipd_m", DEFAULT_IPD)
    vid = _get_number(params, "vid_m", DEFAULT_VID)
    target = _get_number(params, "target_m", 0.30)
    magnitudes = params.get("magnitudes_m")
    if magnitudes is None:
        base = DEFAULT_MAGNITUDES[family]
        magnitudes = [-base, 0.0, base] if base else [0.0]
    if not isinstance(magnitudes, (list, tuple)) or not magnitudes:
        raise _invalid("magnitudes_m must be a non-empty list of numbers")
    for m in magnitudes:
        if isinstance(m, bool) or not isinstance(m, (int, float)):
            raise _invalid(f"magnitudes_m entries must be numbers, got {m!r}")
        _check_magnitude(family, float(m))
    hmd, _, viewer = scenario(FAMILY_NONE, 0.0, ipd, vid)
    try:
        table = fieldgen.predict_reach_bias(family, [float(m) for m in magnitudes],
                                            target, hmd, viewer)
    except ValueError as exc:
        raise _invalid(str(exc))
    return table.to_payload()


def _trials_from(params: Mapping) -> TrialSet:
    raw = params.get("bins")
    if raw is None:
        raise _invalid("missing required parameter 'bins'")
    if not isinstance(raw, (list, tuple)) or not raw:
        raise _invalid("bins must be a non-empty list")
    bins = []
    for entry in raw:
        if not isinstance(entry, Mapping):
            raise _invalid("each bin must be an object with x, n_total, n_closer")
        try:
            bins.append(TrialBin(x=_get_number(entry, "x", None),
                                 n_total=_get_int(entry, "n_total", None, minimum=0),
                                 n_closer=_get_int(entry, "n_closer", None, minimum=0)))
        except ValueError as exc:
            raise _invalid(str(exc))
    return TrialSet(tuple(bins))


def fit(params: Mapping) -> dict:
    """Fit the psychometric slope to binned responses, with bootstrap spread."""
    trials = _trials_from(params)
    n_resamples = _get_int(params, "n_resamples", 200, minimum=1)
    seed = _get_int(params, "seed", 0)
    try:
        result = bootstrap_fit(trials, n_resamples=n_resamples, seed=seed)
    except DegenerateDataError as exc:
        raise ApiError("DegenerateData", str(exc), status=400)
    return {
        "slope": result.slope,
        "nll": result.nll,
        "bootstrap_sd": result.bootstrap_sd,
        "n_resamples": result.n_resamples,
        "converged": result.converged,
        "n_levels": trials.n_levels,
        "n_trials": trials.n_trials,
    }


def simulate(params: Mapping) -> dict:
    """Simulate a seeded 2IFC observer; returns the binned TrialSet payload."""
    family = _get_family(params, (FAMILY_PASSTHROUGH, FAMILY_IPD_IAD))
    ipd = _get_number(params, "ipd_m", DEFAULT_IPD)
    vid = _get_number(params, "vid_m", DEFAULT_VID)
    target_z = _get_number(params, "target_z_m", None)
    sigma = _get_number(params, "sigma_m", 0.02)
    n_per_level = _get_int(params, "n_per_level", 100, minimum=1)
    seed = _get_int(params, "seed", None)  # explicit seed keeps responses reproducible
    levels = params.get("levels_m")
    if levels is None:
        levels = list(DEFAULT_SIMULATE_LEVELS[family])
    if not isinstance(levels, (list, tuple)) or not levels:
        raise _invalid("levels_m must be a non-empty list of numbers")
    for level in levels:
        if isinstance(level, bool) or not isinstance(level, (int, float)):
            raise _invalid(f"levels_m entries must be numbers, got {level!r}")
        _check_magnitude(family, float(level))
    if sigma < 0:
        raise _invalid(f"sigma_m must be >= 0, got {sigma}")
    if not target_z > 0:
        raise _invalid(f"target_z_m must be positive, got {target_z}")

    hmd, _, viewer = scenario(FAMILY_NONE, 0.0, ipd, vid)
    config = ObserverConfig(hmd=hmd, viewer=viewer, family=family,
                            target_distance=target_z, sigma=sigma, seed=seed)
    try:
        trials = simulate_2ifc_trials(config, [float(x) for x in levels], n_per_level)
    except DivergedError as exc:
        raise ApiError("Diverged", str(exc), status=422)
    return {"bins": [{"x": b.x, "n_total": b.n_total, "n_closer": b.n_closer}
                     for b in trials.bins]}


def pipeline_check(params: Mapping) -> dict:
    """Equivalence report for the canonical presets over a target grid."""
    ipd = _get_number(params, "ipd_m", DEFAULT_IPD)
    vid = _get_number(params, "vid_m", DEFAULT_VID)
    passthrough_dz = _get_number(params, "passthrough_m", DEFAULT_MAGNITUDES[FAMILY_PASSTHROUGH])
    ipd_iad_delta = _get_number(params, "ipd_iad_m", -DEFAULT_MAGNITUDES[FAMILY_IPD_IAD])
    eye_relief_e = _get_number(params, "eye_relief_m", DEFAULT_MAGNITUDES[FAMILY_EYE_RELIEF])
    _check_magnitude(FAMILY_PASSTHROUGH, passthrough_dz)
    _check_magnitude(FAMILY_IPD_IAD, ipd_iad_delta)
    _check_magnitude(FAMILY_EYE_RELIEF, eye_relief_e)

    raw = dict(params.get("grid") or {})
    defaults = PIPELINE_GRID_DEFAULTS
    try:
        grid = fieldgen.FieldGrid(
            x_min=_get_number(raw, "x_min_m", defaults["x_min"]),
            x_max=_get_number(raw, "x_max_m", defaults["x_max"]),
            nx=_get_int(raw, "nx", defaults["nx"], minimum=2),
            z_min=_get_number(raw, "z_min_m", defaults["z_min"]),
            z_max=_get_number(raw, "z_max_m", defaults["z_max"]),
            nz=_get_int(raw, "nz", defaults["nz"], minimum=2),
            y=_get_number(raw, "y_m", defaults["y"]),
        )
        hmd = HmdGeometry(iad=ipd, vid=vid)
    except ValueError as exc:
        raise _invalid(str(exc))

    configs = canonical_configs(hmd, passthrough_dz=passthrough_dz,
                                ipd_iad_delta=ipd_iad_delta, eye_relief_e=eye_relief_e)
    report = equivalence_report(configs, grid.points())
    payload = report.to_payload()
    payload["grid"] = grid.to_payload()
    return payload


def health() -> dict:
    return {"status": "ok"}
