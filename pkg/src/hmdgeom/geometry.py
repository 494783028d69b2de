"""Closed-form stereo geometry for head-mounted display error modeling.

Coordinate conventions: right-handed frame with +x rightward, +y upward and
+z pointing from the viewer toward the scene. All quantities are meters.
The headset display centers of projection (CoPs) sit at (-iad/2, 0, 0) and
(+iad/2, 0, 0); the virtual image plane is the infinite plane z = vid.

A scene point is projected through each (possibly displaced) render camera
onto the virtual image plane with the angular transfer anchored at the
nominal display CoP, then re-viewed from the (possibly displaced) eyes. The
perceived point is the mutual-perpendicular midpoint of the two viewing
rays. Perceived positions are reported both in the HMD frame (origin at the
midpoint of the display CoPs) and in the egocentric frame (origin at the
midpoint of the actual eye CoPs).

Sign conventions: a render-camera displacement dz > 0 puts the camera in
front of the CoP; an eye-relief error e > 0 puts the eye in front of the
CoP; an IPD-IAD delta is IAD - IPD, so delta > 0 means the headset lens
spacing is wider than the viewer's eyes.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

# Tolerances: double-precision geometry at meter scale.
GEOMETRY_TOL = 1e-9
PARALLEL_TOL = 1e-12

CONVERGED = "converged"
DIVERGED = "diverged"

LEFT = "left"
RIGHT = "right"

FAMILY_NONE = "none"
FAMILY_PASSTHROUGH = "passthrough"
FAMILY_IPD_IAD = "ipd-iad"
FAMILY_EYE_RELIEF = "eye-relief"
ERROR_FAMILIES = (FAMILY_NONE, FAMILY_PASSTHROUGH, FAMILY_IPD_IAD, FAMILY_EYE_RELIEF)


class PointBehindCameraError(ValueError):
    """The target does not lie in front of a projection origin."""

    def __init__(self, message: str, stage: str = "render", side: str | None = None):
        super().__init__(message)
        self.stage = stage
        self.side = side


class DegenerateRayError(ValueError):
    """A ray was given a zero-length direction."""


class FixationBehindEyeError(ValueError):
    """The fixation point is not in front of an eye."""


class DivergedError(ValueError):
    """A computation required a converged percept but triangulation diverged."""


@dataclass(frozen=True)
class Point3:
    """A 3D point/vector in meters. Components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Point3 components must be finite, got ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Point3") -> "Point3":
        return Point3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Point3") -> "Point3":
        return Point3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, factor: float) -> "Point3":
        return Point3(self.x * factor, self.y * factor, self.z * factor)

    def dot(self, other: "Point3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def distance_to(self, other: "Point3") -> float:
        return (self - other).norm()

    def mirrored_x(self) -> "Point3":
        return Point3(-self.x, self.y, self.z)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


ORIGIN = Point3(0.0, 0.0, 0.0)


def midpoint(a: Point3, b: Point3) -> Point3:
    return Point3((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.z + b.z) / 2.0)


@dataclass(frozen=True)
class HmdGeometry:
    """Headset geometry: CoP spacing (iad) and virtual image distance (vid).

    The left/right display CoPs are implicit at (-iad/2, 0, 0) and
    (+iad/2, 0, 0); the virtual image plane sits at z = vid.
    """

    iad: float
    vid: float

    def __post_init__(self):
        if not (math.isfinite(self.iad) and self.iad > 0):
            raise ValueError(f"iad must be positive, got {self.iad}")
        if not (math.isfinite(self.vid) and self.vid > 0):
            raise ValueError(f"vid must be positive, got {self.vid}")

    @property
    def left_cop(self) -> Point3:
        return Point3(-self.iad / 2.0, 0.0, 0.0)

    @property
    def right_cop(self) -> Point3:
        return Point3(self.iad / 2.0, 0.0, 0.0)

    def cop(self, side: str) -> Point3:
        if side == LEFT:
            return self.left_cop
        if side == RIGHT:
            return self.right_cop
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class ViewerGeometry:
    """Viewer eye positions in the HMD frame.

    left_eye/right_eye are the eye rotation-center positions before any
    error-spec view offsets are applied; with zero errors they coincide with
    the display CoPs. parallax_offset is the rotation-center-to-CoP distance
    used for gaze-dependent ocular parallax (0 disables it).
    """

    ipd: float
    left_eye: Point3
    right_eye: Point3
    parallax_offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.ipd) and self.ipd > 0):
            raise ValueError(f"ipd must be positive, got {self.ipd}")
        if not (math.isfinite(self.parallax_offset) and self.parallax_offset >= 0):
            raise ValueError(f"parallax_offset must be >= 0, got {self.parallax_offset}")

    @classmethod
    def at_cops(cls, hmd: HmdGeometry, ipd: float | None = None,
                parallax_offset: float = 0.0) -> "ViewerGeometry":
        """Viewer whose error-free eye positions coincide with the display CoPs."""
        return cls(ipd=hmd.iad if ipd is None else ipd,
                   left_eye=hmd.left_cop, right_eye=hmd.right_cop,
                   parallax_offset=parallax_offset)

    @property
    def cyclopean(self) -> Point3:
        return midpoint(self.left_eye, self.right_eye)


@dataclass(frozen=True)
class DirectPassthrough:
    """Render cameras displaced by (0, 0, dz) from the CoPs; dz > 0 = in front."""

    dz: float


@dataclass(frozen=True)
class IpdIad:
    """Lens-spacing mismatch delta = IAD - IPD, split symmetrically per eye."""

    delta: float


@dataclass(frozen=True)
class EyeRelief:
    """Both eyes displaced by (0, 0, e); e > 0 = eye in front of the CoP."""

    e: float


@dataclass(frozen=True)
class CustomOffsets:
    """Explicit per-eye render-camera and eye displacements."""

    render_left: Point3 = ORIGIN
    render_right: Point3 = ORIGIN
    view_left: Point3 = ORIGIN
    view_right: Point3 = ORIGIN


ErrorSpec = Union[DirectPassthrough, IpdIad, EyeRelief, CustomOffsets]


def no_error() -> CustomOffsets:
    return CustomOffsets()


def resolve_offsets(spec: ErrorSpec) -> CustomOffsets:
    """Reduce any error spec to explicit per-eye offsets.

    IpdIad(delta) moves the eyes to +-ipd/2 with ipd = iad - delta: each eye
    shifts inward by delta/2 when the headset spacing is too wide.
    """
    if isinstance(spec, CustomOffsets):
        return spec
    if isinstance(spec, DirectPassthrough):
        shift = Point3(0.0, 0.0, spec.dz)
        return CustomOffsets(render_left=shift, render_right=shift)
    if isinstance(spec, IpdIad):
        half = spec.delta / 2.0
        return CustomOffsets(view_left=Point3(half, 0.0, 0.0),
                             view_right=Point3(-half, 0.0, 0.0))
    if isinstance(spec, EyeRelief):
        shift = Point3(0.0, 0.0, spec.e)
        return CustomOffsets(view_left=shift, view_right=shift)
    raise TypeError(f"unknown error spec {spec!r}")


@dataclass(frozen=True)
class PerceptionResult:
    """Triangulated percept of one scene point.

    perceived_hmd is in the HMD frame; perceived_egocentric subtracts the
    cyclopean position of the actual eye CoPs. Both are None when the
    viewing rays diverge (parallel, or closest approach behind an eye) or a
    projection stage failed inside a scene sweep. residual is the length of
    the mutual-perpendicular segment between the two viewing rays, None only
    when no ray pair was formed.
    """

    perceived_hmd: Point3 | None
    perceived_egocentric: Point3 | None
    residual: float | None
    status: str

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def project_to_display(target: Point3, eye_side: str, hmd: HmdGeometry,
                       render_offset: Point3 = ORIGIN) -> Point3:
    """Project a scene point through a render camera onto the display plane.

    The render camera sits at CoP + render_offset; the pixel direction seen
    from the camera is re-anchored at the nominal CoP and intersected with
    the plane z = vid. The returned point has z == vid exactly.

    Raises PointBehindCameraError when the target is not in front of the
    render camera.
    """
    cop = hmd.cop(eye_side)
    camera = cop + render_offset
    depth = target.z - camera.z
    if depth <= GEOMETRY_TOL:
        raise PointBehindCameraError(
            f"target z={target.z} not in front of {eye_side} render camera at z={camera.z}",
            stage="render", side=eye_side)
    scale = hmd.vid / depth
    direction = target - camera
    return Point3(cop.x + direction.x * scale, cop.y + direction.y * scale, hmd.vid)


def triangulate(ray_a_origin: Point3, ray_a_through: Point3,
                ray_b_origin: Point3, ray_b_through: Point3,
                ) -> tuple[Point3 | None, float, str]:
    """Closest-approach triangulation of two rays.

    Returns (point, residual, status): the midpoint of the mutual
    perpendicular between the two lines, the length of that segment, and
    CONVERGED/DIVERGED. Divergence means the lines are parallel (within
    PARALLEL_TOL) or the closest approach lies behind either ray origin; no
    point is reported then, but the residual is still the perpendicular
    distance between the lines.

    Raises DegenerateRayError on a zero-length direction.
    """
    dir_a = ray_a_through - ray_a_origin
    dir_b = ray_b_through - ray_b_origin
    norm_a = dir_a.norm()
    norm_b = dir_b.norm()
    if norm_a <= PARALLEL_TOL or norm_b <= PARALLEL_TOL:
        raise DegenerateRayError("ray direction has zero length")
    ua = dir_a.scaled(1.0 / norm_a)
    ub = dir_b.scaled(1.0 / norm_b)

    w0 = ray_a_origin - ray_b_origin
    b = ua.dot(ub)
    d = ua.dot(w0)
    e = ub.dot(w0)
    denom = 1.0 - b * b  # |ua x ub|^2
    if denom < PARALLEL_TOL:
        perp = w0 - ua.scaled(w0.dot(ua))
        return None, perp.norm(), DIVERGED

    # Segment length via the common-perpendicular projection |w0 . n|; this is
    # exact for coplanar rays where the closest-pair difference would be pure
    # cancellation noise.
    cross = Point3(ua.y * ub.z - ua.z * ub.y,
                   ua.z * ub.x - ua.x * ub.z,
                   ua.x * ub.y - ua.y * ub.x)
    residual = abs(w0.dot(cross)) / math.sqrt(denom)

    t_a = (b * e - d) / denom
    t_b = (e - b * d) / denom
    if t_a < -GEOMETRY_TOL or t_b < -GEOMETRY_TOL:
        return None, residual, DIVERGED
    close_a = ray_a_origin + ua.scaled(t_a)
    close_b = ray_b_origin + ub.scaled(t_b)
    return midpoint(close_a, close_b), residual, CONVERGED


def _displace_toward(eye: Point3, fixation: Point3, offset: float) -> Point3:
    gaze = fixation - eye
    if gaze.z <= GEOMETRY_TOL:
        raise FixationBehindEyeError(
            f"fixation z={fixation.z} not in front of eye at z={eye.z}")
    return eye + gaze.scaled(offset / gaze.norm())


def apply_ocular_parallax(viewer: ViewerGeometry, fixation: Point3) -> ViewerGeometry:
    """Displace each eye CoP toward the fixation point by parallax_offset.

    The stored eye positions are treated as rotation centers; the returned
    viewer carries the gaze-dependent CoPs with parallax_offset consumed
    (set to 0) so the displacement is never applied twice. A zero offset
    returns the input unchanged.
    """
    if viewer.parallax_offset == 0.0:
        return viewer
    return replace(
        viewer,
        left_eye=_displace_toward(viewer.left_eye, fixation, viewer.parallax_offset),
        right_eye=_displace_toward(viewer.right_eye, fixation, viewer.parallax_offset),
        parallax_offset=0.0,
    )


def perceive_point(target: Point3, hmd: HmdGeometry, errors: ErrorSpec,
                   viewer: ViewerGeometry) -> PerceptionResult:
    """Perceived position of one scene point under an error configuration.

    Projects the target through both render cameras onto the display plane,
    then triangulates the rays from the actual eye CoPs (viewer eyes plus
    the error's view offsets, plus the ocular-parallax displacement toward
    the target when enabled) through the display points.

    Raises PointBehindCameraError when the target is behind a render camera;
    a failed triangulation is reported via status, not raised.
    """
    offsets = resolve_offsets(errors)
    q_left = project_to_display(target, LEFT, hmd, offsets.render_left)
    q_right = project_to_display(target, RIGHT, hmd, offsets.render_right)

    eye_left = viewer.left_eye + offsets.view_left
    eye_right = viewer.right_eye + offsets.view_right
    if viewer.parallax_offset > 0.0:
        eye_left = _displace_toward(eye_left, target, viewer.parallax_offset)
        eye_right = _displace_toward(eye_right, target, viewer.parallax_offset)

    point, residual, status = triangulate(eye_left, q_left, eye_right, q_right)
    cyclopean = midpoint(eye_left, eye_right)
    ego = point - cyclopean if point is not None else None
    return PerceptionResult(point, ego, residual, status)


def perceive_scene(targets: Sequence[Point3], hmd: HmdGeometry, errors: ErrorSpec,
                   viewer: ViewerGeometry) -> list[PerceptionResult]:
    """Elementwise perceive_point; per-point failures become diverged results."""
    if not targets:
        raise ValueError("targets must be a non-empty sequence")
    results = []
    for target in targets:
        try:
            results.append(perceive_point(target, hmd, errors, viewer))
        except PointBehindCameraError:
            results.append(PerceptionResult(None, None, None, DIVERGED))
    return results


def scenario(family: str, magnitude: float, ipd: float, vid: float,
             parallax_offset: float = 0.0,
             ) -> tuple[HmdGeometry, ErrorSpec, ViewerGeometry]:
    """Build (hmd, error spec, viewer) for a named error family.

    The viewer's IPD is held fixed; for the ipd-iad family the headset IAD
    is derived as ipd + magnitude so the eyes land at +-ipd/2 after the view
    offsets, matching a viewer of that IPD wearing a headset whose lens
    spacing is off by `magnitude`. For all other families IAD = IPD.
    """
    if family == FAMILY_NONE:
        hmd = HmdGeometry(iad=ipd, vid=vid)
        spec: ErrorSpec = no_error()
    elif family == FAMILY_PASSTHROUGH:
        hmd = HmdGeometry(iad=ipd, vid=vid)
        spec = DirectPassthrough(magnitude)
    elif family == FAMILY_IPD_IAD:
        hmd = HmdGeometry(iad=ipd + magnitude, vid=vid)
        spec = IpdIad(magnitude)
    elif family == FAMILY_EYE_RELIEF:
        hmd = HmdGeometry(iad=ipd, vid=vid)
        spec = EyeRelief(magnitude)
    else:
        raise ValueError(f"unknown error family {family!r}; expected one of {ERROR_FAMILIES}")
    viewer = ViewerGeometry.at_cops(hmd, ipd=ipd, parallax_offset=parallax_offset)
    return hmd, spec, viewer
