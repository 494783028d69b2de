"""Logistic psychometric fitting and a simulated 2IFC distance observer.

The response model is a logistic in error magnitude x (meters),

    P_C(x) = guess + (1 - lapse - guess) / (1 + exp(-slope * (x - threshold)))

with threshold fixed at 0, lapse at 0.01 and guess at 0; only the slope is
fitted, by maximum likelihood over binned binary responses. The fitter is a
deterministic bounded search: bracket the minimum expanding from a start
guess of 20, then golden-section the bracket down to 1e-4 within the slope
bounds of -2000..2000. Bootstrap spread comes from resampling trials with
replacement within each stimulus level and refitting; every resample draws
from its own derived seed so results do not depend on execution order.

The simulated observer compares a no-error reference percept against an
error-magnitude-x comparison percept (both from the closed-form geometry)
and reports "comparison closer" when comparison + e1 < reference + e2 with
e1, e2 independent zero-mean Gaussians of width sigma. n_closer therefore
counts "comparison reported closer", which makes slopes positive whenever
positive error magnitudes pull targets toward the viewer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import (
    CONVERGED,
    FAMILY_IPD_IAD,
    FAMILY_PASSTHROUGH,
    GEOMETRY_TOL,
    DivergedError,
    HmdGeometry,
    Point3,
    ViewerGeometry,
    perceive_point,
    scenario,
)

SLOPE_BOUNDS = (-2000.0, 2000.0)
SLOPE_START = 20.0
BRACKET_TOL = 1e-4
MAX_ITERATIONS = 500
_EXP_CLAMP = 700.0
_BOUND_SNAP = 1e-3

OBSERVER_FAMILIES = (FAMILY_PASSTHROUGH, FAMILY_IPD_IAD)
SUMMARY_DISTANCES = (0.5, 1.3, 2.5)


class DegenerateDataError(ValueError):
    """Not enough distinct stimulus levels (or trials) to fit a slope."""


class MissingConditionError(KeyError):
    """A required (family, distance) fit is absent from a summary input."""


@dataclass(frozen=True)
class PsychometricModel:
    """Logistic response model; only the slope varies in this artifact."""

    slope: float
    threshold: float = 0.0
    lapse: float = 0.01
    guess: float = 0.0

    def __post_init__(self):
        if not SLOPE_BOUNDS[0] <= self.slope <= SLOPE_BOUNDS[1]:
            raise ValueError(f"slope must be within {SLOPE_BOUNDS}, got {self.slope}")
        if not 0.0 <= self.lapse <= 0.05:
            raise ValueError(f"lapse must be within [0, 0.05], got {self.lapse}")
        if not 0.0 <= self.guess <= 0.5:
            raise ValueError(f"guess must be within [0, 0.5], got {self.guess}")


@dataclass(frozen=True)
class TrialBin:
    """Responses at one error magnitude: n_closer of n_total said "closer"."""

    x: float
    n_total: int
    n_closer: int

    def __post_init__(self):
        if self.n_total < 0 or not 0 <= self.n_closer <= self.n_total:
            raise ValueError(
                f"need 0 <= n_closer <= n_total, got {self.n_closer}/{self.n_total}")


@dataclass(frozen=True)
class TrialSet:
    """Binned 2IFC responses over a set of error magnitudes."""

    bins: tuple[TrialBin, ...]

    @classmethod
    def from_bins(cls, bins: Iterable[TrialBin]) -> "TrialSet":
        return cls(tuple(bins))

    @classmethod
    def from_responses(cls, pairs: Iterable[tuple[float, int]]) -> "TrialSet":
        """Aggregate raw (error magnitude, response) rows; response 1 = closer."""
        totals: dict[float, int] = {}
        closer: dict[float, int] = {}
        for x, response in pairs:
            if response not in (0, 1):
                raise ValueError(f"response must be 0 or 1, got {response!r}")
            totals[x] = totals.get(x, 0) + 1
            closer[x] = closer.get(x, 0) + response
        return cls(tuple(TrialBin(x, totals[x], closer[x]) for x in sorted(totals)))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        xs = np.array([b.x for b in self.bins], dtype=float)
        nt = np.array([b.n_total for b in self.bins], dtype=float)
        nc = np.array([b.n_closer for b in self.bins], dtype=float)
        return xs, nt, nc

    @property
    def n_levels(self) -> int:
        return len({b.x for b in self.bins})

    @property
    def n_trials(self) -> int:
        return sum(b.n_total for b in self.bins)


@dataclass(frozen=True)
class PsychometricFit:
    slope: float
    nll: float
    bootstrap_sd: float
    n_resamples: int
    converged: bool


@dataclass(frozen=True)
class ObserverConfig:
    """Simulated 2IFC observer driven by the geometric model.

    The viewer's IPD and the headset VID parameterize the geometry; for the
    ipd-iad family the comparison headset IAD is rebuilt per level as
    ipd + x. sigma is the internal comparison noise (meters).
    """

    hmd: HmdGeometry
    viewer: ViewerGeometry
    family: str
    target_distance: float
    sigma: float
    seed: int

    def __post_init__(self):
        if self.family not in OBSERVER_FAMILIES:
            raise ValueError(f"family must be one of {OBSERVER_FAMILIES}, got {self.family!r}")
        if not self.target_distance > 0:
            raise ValueError(f"target_distance must be positive, got {self.target_distance}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def logistic_pc(model: PsychometricModel, x: float) -> float:
    """Probability of a "closer" response at error magnitude x.

    The exponent is clamped at +-700 so the value saturates instead of
    overflowing; the result stays within [guess, 1 - lapse].
    """
    arg = -model.slope * (x - model.threshold)
    arg = max(-_EXP_CLAMP, min(_EXP_CLAMP, arg))
    return model.guess + (1.0 - model.lapse - model.guess) / (1.0 + math.exp(arg))


def _nll_at(slope: float, xs: np.ndarray, nt: np.ndarray, nc: np.ndarray,
            threshold: float = 0.0, lapse: float = 0.01, guess: float = 0.0) -> float:
    arg = np.clip(-slope * (xs - threshold), -_EXP_CLAMP, _EXP_CLAMP)
    pc = guess + (1.0 - lapse - guess) / (1.0 + np.exp(arg))
    return float(-np.sum(nc * np.log(pc) + (nt - nc) * np.log1p(-pc)))


def neg_log_likelihood(model: PsychometricModel, trials: TrialSet) -> float:
    """Negative log-likelihood of the binned responses under the model."""
    if not trials.bins:
        raise ValueError("trials must contain at least one bin")
    xs, nt, nc = trials.arrays()
    return _nll_at(model.slope, xs, nt, nc,
                   threshold=model.threshold, lapse=model.lapse, guess=model.guess)


def _minimize_slope(objective) -> tuple[float, float, bool]:
    """Deterministic 1-D bounded minimization: bracket from the start guess,
    then golden-section. Returns (argmin, value, converged)."""
    lo, hi = SLOPE_BOUNDS
    evals = 0

    def f(x: float) -> float:
        nonlocal evals
        evals += 1
        return objective(x)

    x0 = min(max(SLOPE_START, lo), hi)
    f0 = f(x0)
    step = 1.0
    x_plus, x_minus = min(x0 + step, hi), max(x0 - step, lo)
    f_plus, f_minus = f(x_plus), f(x_minus)

    if f0 <= f_plus and f0 <= f_minus:
        a, b = x_minus, x_plus
    else:
        direction = 1.0 if f_plus < f_minus else -1.0
        prev, cur = x0, (x_plus if direction > 0 else x_minus)
        f_cur = f_plus if direction > 0 else f_minus
        a, b = None, None
        while evals < MAX_ITERATIONS:
            step *= 2.0
            nxt = min(max(cur + direction * step, lo), hi)
            if nxt == cur:  # pinned at a bound while still descending
                a, b = (prev, cur) if direction > 0 else (cur, prev)
                break
            f_nxt = f(nxt)
            if f_nxt >= f_cur:
                a, b = (prev, nxt) if direction > 0 else (nxt, prev)
                break
            prev, cur, f_cur = cur, nxt, f_nxt
        if a is None:
            a, b = (prev, cur) if direction > 0 else (cur, prev)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    converged = False
    while evals < MAX_ITERATIONS:
        if b - a < BRACKET_TOL:
            converged = True
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    converged = converged or (b - a) < BRACKET_TOL

    best = (a + b) / 2.0
    if abs(best - lo) < _BOUND_SNAP:
        best = lo
    elif abs(best - hi) < _BOUND_SNAP:
        best = hi
    return best, f(best), converged


def fit_slope(trials: TrialSet) -> PsychometricFit:
    """Maximum-likelihood slope fit over the bounded slope range.

    Raises DegenerateDataError with fewer than two distinct stimulus levels
    or no trials at all. Deterministic for a fixed input.
    """
    if trials.n_levels < 2:
        raise DegenerateDataError(
            f"need >= 2 distinct stimulus levels, got {trials.n_levels}")
    if trials.n_trials < 1:
        raise DegenerateDataError("need at least one trial")
    xs, nt, nc = trials.arrays()
    slope, nll, converged = _minimize_slope(lambda s: _nll_at(s, xs, nt, nc))
    return PsychometricFit(slope=slope, nll=nll, bootstrap_sd=0.0,
                           n_resamples=0, converged=converged)


def bootstrap_fit(trials: TrialSet, n_resamples: int = 200, seed: int = 0) -> PsychometricFit:
    """Slope of the original fit plus the SD of slopes over stratified resamples.

    Trials are resampled with replacement within each stimulus level. Each
    resample uses an independently derived seed, so the result is identical
    under any execution order and bit-identical for a fixed seed.
    """
    if n_resamples < 1:
        raise ValueError(f"n_resamples must be >= 1, got {n_resamples}")
    base = fit_slope(trials)
    slopes = np.empty(n_resamples, dtype=float)
    for i in range(n_resamples):
        rng = np.random.default_rng([seed, i])
        resampled = []
        for b in trials.bins:
            p_hat = b.n_closer / b.n_total if b.n_total else 0.0
            resampled.append(TrialBin(b.x, b.n_total, int(rng.binomial(b.n_total, p_hat))))
        slopes[i] = fit_slope(TrialSet(tuple(resampled))).slope
    return PsychometricFit(slope=base.slope, nll=base.nll,
                           bootstrap_sd=float(np.std(slopes)),
                           n_resamples=n_resamples, converged=base.converged)


def _perceived_distance(config: ObserverConfig, magnitude: float) -> float:
    """Egocentric distance of the on-axis target under an error magnitude."""
    hmd, spec, viewer = scenario(config.family, magnitude,
                                 ipd=config.viewer.ipd, vid=config.hmd.vid,
                                 parallax_offset=config.viewer.parallax_offset)
    target = Point3(0.0, 0.0, config.target_distance)
    result = perceive_point(target, hmd, spec, viewer)
    if result.status != CONVERGED:
        raise DivergedError(
            f"percept diverged for {config.family} magnitude {magnitude} "
            f"at target {config.target_distance} m")
    return result.perceived_egocentric.norm()


def simulate_2ifc_trials(config: ObserverConfig, x_levels: Sequence[float],
                         n_per_level: int) -> TrialSet:
    """Simulate binned 2IFC responses at the given error magnitudes.

    Per trial the observer reports "comparison closer" when the noisy
    comparison distance is below the noisy reference distance; with zero
    sigma, percepts equal within the geometric tolerance are ties broken by
    a fair coin from the seeded generator.
    """
    if n_per_level < 1:
        raise ValueError(f"n_per_level must be >= 1, got {n_per_level}")
    rng = np.random.default_rng(config.seed)
    reference = _perceived_distance(config, 0.0)
    bins = []
    for x in x_levels:
        comparison = _perceived_distance(config, x)
        if config.sigma > 0.0:
            noise = rng.normal(0.0, config.sigma, size=(n_per_level, 2))
            n_closer = int(np.sum(comparison + noise[:, 0] < reference + noise[:, 1]))
        elif abs(comparison - reference) < GEOMETRY_TOL:
            n_closer = int(rng.integers(0, 2, size=n_per_level).sum())
        else:
            n_closer = n_per_level if comparison < reference else 0
        bins.append(TrialBin(float(x), n_per_level, n_closer))
    return TrialSet(tuple(bins))


def slope_sign_summary(fits: Mapping[tuple[str, float], PsychometricFit],
                       flat_slope_threshold: float = 5.0) -> dict:
    """Slope signs and distance trends for both error families.

    Expects fits keyed by (family, distance) for both observer families at
    0.5/1.3/2.5 m. Flags deviations from the geometry-predicted pattern:
    passthrough slopes positive everywhere; ipd-iad positive in front of the
    display, near zero at it, negative behind it, declining with distance.
    """
    for family in OBSERVER_FAMILIES:
        for distance in SUMMARY_DISTANCES:
            if (family, distance) not in fits:
                raise MissingConditionError(f"missing fit for ({family}, {distance})")

    def slopes_of(family: str) -> dict[float, float]:
        return {d: fits[(family, d)].slope for d in SUMMARY_DISTANCES}

    violations: list[str] = []

    pt = slopes_of(FAMILY_PASSTHROUGH)
    pt_positive = all(s > 0 for s in pt.values())
    pt_flat = all(abs(s) < flat_slope_threshold for s in pt.values())
    if not pt_positive:
        violations.append("passthrough: expected positive slopes at all distances")

    ip = slopes_of(FAMILY_IPD_IAD)
    front, at_vid, behind = (ip[d] for d in SUMMARY_DISTANCES)
    ip_flat = all(abs(s) < flat_slope_threshold for s in ip.values())
    pattern_ok = (front > 0 and abs(at_vid) < flat_slope_threshold and behind < 0)
    monotonic = front > at_vid > behind
    if not pattern_ok:
        violations.append(
            "ipd-iad: expected positive / near-zero / negative slopes at 0.5 / 1.3 / 2.5 m")
    if not monotonic:
        violations.append("ipd-iad: expected slopes to decline across distances")

    return {
        "passthrough": {"slopes": pt, "all_positive": pt_positive, "no_trend": pt_flat},
        "ipd-iad": {"slopes": ip, "pattern_ok": pattern_ok,
                    "monotonic_decreasing": monotonic, "no_trend": ip_flat},
        "flat_slope_threshold": flat_slope_threshold,
        "violations": violations,
    }
