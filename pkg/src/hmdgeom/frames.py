"""Coordinate-frame bookkeeping for reach distances.

Reach distances are 1-D along the cyclopean z-axis. The HMD frame has its
origin at the midpoint of the display CoPs; the egocentric frame at the
viewer's cyclopean eye. An eye sitting behind the CoP plane (negative
actual_eye_z) makes egocentric distances larger than HMD distances: a
viewer whose eyes are 13 mm too far back must reach 31.3 cm to perceive a
target at 30 cm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

BLIND = "blind"
SIGHTED = "sighted"

_EYE_OFFSET_BOUND = 0.1  # sanity bound for plausible headset fits, meters


class WrongConditionError(ValueError):
    """A reach sample was interpreted under the wrong viewing condition."""


@dataclass(frozen=True)
class EyeOffsetRecord:
    """Signed z-offsets of the cyclopean eye (actual and simulated), HMD frame."""

    actual_eye_z: float
    simulated_eye_z: float

    def __post_init__(self):
        for name in ("actual_eye_z", "simulated_eye_z"):
            value = getattr(self, name)
            if not math.isfinite(value) or abs(value) >= _EYE_OFFSET_BOUND:
                raise ValueError(f"{name} must be finite with |value| < {_EYE_OFFSET_BOUND}, got {value}")


@dataclass(frozen=True)
class ReachSample:
    """One recorded controller reach.

    baseline_bias is the participant's signed no-error blind-reach error
    (reach minus target), so under-reaching is negative.
    """

    measured_hmd: float
    baseline_bias: float = 0.0
    condition: str = BLIND

    def __post_init__(self):
        if not (math.isfinite(self.measured_hmd) and self.measured_hmd > 0):
            raise ValueError(f"measured_hmd must be positive, got {self.measured_hmd}")
        if self.condition not in (BLIND, SIGHTED):
            raise ValueError(f"condition must be 'blind' or 'sighted', got {self.condition!r}")


def hmd_to_egocentric(distance_hmd: float, actual_eye_z: float) -> float:
    """Convert an HMD-frame distance to an egocentric one.

    Subtracts the actual eye z-offset: an eye behind the origin makes the
    egocentric distance larger.
    """
    if not distance_hmd > 0:
        raise ValueError(f"distance_hmd must be positive, got {distance_hmd}")
    return distance_hmd - actual_eye_z


def egocentric_to_simulated_world(distance_ego: float, simulated_eye_z: float) -> float:
    """Where a viewer would reach in a headset that really had the simulated error."""
    if not distance_ego > 0:
        raise ValueError(f"distance_ego must be positive, got {distance_ego}")
    return distance_ego + simulated_eye_z


def interpret_blind_reach(sample: ReachSample, offsets: EyeOffsetRecord,
                          bias_correct: bool = True) -> float:
    """Reinterpret a blind reach under actual and simulated eye positions.

    Pipeline: measured -> optional baseline-bias subtraction -> egocentric
    (actual eye) -> simulated-world (simulated eye). Purely additive, so
    bias correction commutes with the frame shifts.
    """
    if sample.condition != BLIND:
        raise WrongConditionError("interpret_blind_reach requires a blind-condition sample")
    distance = sample.measured_hmd - (sample.baseline_bias if bias_correct else 0.0)
    ego = hmd_to_egocentric(distance, offsets.actual_eye_z)
    return egocentric_to_simulated_world(ego, offsets.simulated_eye_z)


def interpret_sighted_reach(sample: ReachSample) -> float:
    """Closed-loop reaches are already in HMD coordinates; pass through."""
    if sample.condition != SIGHTED:
        raise WrongConditionError("interpret_sighted_reach requires a sighted-condition sample")
    return sample.measured_hmd
