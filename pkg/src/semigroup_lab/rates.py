"""Rate-of-escape limits measured on orbits, and the cross-check of all criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flow import Orbit, hyperbolic_step_estimate, shift_classify
from .generator import (
    ClassificationReport,
    HerglotzTriplet,
    classify_algebraic,
    extremal_zero_hs_test,
    zG_angular_limit,
)
from .hypgeom import total_speed_deviation
from .koenigs import sqrt_conformality
from .limits import CONVERGED, DIVERGES, NO, UNKNOWN, YES, LimitEstimate, scalar_tail_limit, tail_limit

__all__ = [
    "LimitEstimate", "rate_estimate", "slope", "SlopeResult", "ValidationReport", "cross_validate", "classify",
    "RATE_RTOL", "SQRT_T_HORIZON",
]

RATE_RTOL = 1e-3
TAIL_WINDOW = 8
INF_THRESHOLD = 1e3
SQRT_T_HORIZON = 1e6
SLOPE_ATOL = 1e-3

SQRT_T = "sqrt_t"
LINEAR_T = "t"
EXP_LAMBDA = "exp_lambda"


def _scaled(orbit: Orbit, normalization: str, lam: float | None):
    mask = orbit.times >= 1.0
    t, v = orbit.times[mask], orbit.values[mask]
    if normalization == SQRT_T:
        return t, v / np.sqrt(t)
    if normalization == LINEAR_T:
        return t, v / t
    if normalization == EXP_LAMBDA:
        if lam is None or lam <= 0:
            raise ValueError("exp_lambda normalization needs lam > 0")
        return t, v * np.exp(-lam * t)
    raise ValueError(f"unknown normalization {normalization!r}")


def rate_estimate(
    orbit: Orbit,
    normalization: str = SQRT_T,
    *,
    lam: float | None = None,
    rtol: float = RATE_RTOL,
    window: int = TAIL_WINDOW,
    inf_threshold: float = INF_THRESHOLD,
    min_horizon: float = SQRT_T_HORIZON,
) -> LimitEstimate:
    """Limit of ``phi_t(z)/n(t)`` from the tail of the orbit samples.

    Converged only when modulus and argument both settle to ``rtol`` over the
    last ``window`` samples; an increasing modulus above ``inf_threshold`` is
    flagged infinite.  In ``sqrt_t`` mode an orbit shorter than
    ``min_horizon`` is undetermined.
    """
    t, scaled = _scaled(orbit, normalization, lam)
    if normalization == SQRT_T and orbit.t_max < min_horizon:
        return LimitEstimate(complex(scaled[-1]) if scaled.size else 0j, False, math.inf, (), UNKNOWN)
    return tail_limit(scaled, rtol=rtol, window=window, inf_threshold=inf_threshold)


@dataclass(frozen=True)
class SlopeResult:
    limit: LimitEstimate
    orthogonal: str  # yes / no / undetermined

    def to_json(self) -> dict:
        return {"limit": self.limit.to_json(), "orthogonal": self.orthogonal}


def slope(orbit: Orbit, *, atol: float = SLOPE_ATOL, window: int = TAIL_WINDOW) -> SlopeResult:
    """Limit of ``arg phi_t(z)``; orthogonal convergence iff it is ``pi/2``."""
    args = np.angle(orbit.values[orbit.times >= 1.0])
    lim = scalar_tail_limit(args, atol=atol, window=window)
    if not lim.converged:
        return SlopeResult(lim, UNKNOWN)
    return SlopeResult(lim, YES if abs(lim.value.real - math.pi / 2) <= atol else NO)


def _pair(c):
    return None if c is None else [c.real, c.imag]


@dataclass
class ValidationReport:
    verdicts: dict
    constants: dict
    measured: LimitEstimate
    tolerances: dict
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.failures

    @property
    def extremal(self) -> str:
        determined = {v for v in self.verdicts.values() if v != UNKNOWN}
        return determined.pop() if len(determined) == 1 else UNKNOWN

    def to_json(self) -> dict:
        return {
            "agree": self.agree,
            "extremal": self.extremal,
            "verdicts": dict(self.verdicts),
            "constants": {k: _pair(v) for k, v in self.constants.items()},
            "measured": self.measured.to_json(),
            "tolerances": dict(self.tolerances),
            "details": self.details,
            "failures": list(self.failures),
        }


def cross_validate(triplet: HerglotzTriplet, orbit: Orbit, *, rtol: float = RATE_RTOL) -> ValidationReport:
    """Run the moment, zG, square-root Koenigs and orbit-rate criteria and compare.

    The total-speed criterion is run as well.  Verdicts that are determined
    must coincide; when the common verdict is ``yes`` every predicted rate
    constant must match the measured ``lim phi_t/sqrt(t)`` to ``rtol``
    relative.  Any mismatch is listed in ``failures``.
    """
    if triplet.alpha > 0 or triplet.trivial:
        raise ValueError("cross-validation applies to non-trivial parabolic generators")
    verdicts, constants, details = {}, {}, {}

    verdicts["moments"], constants["moments"] = extremal_zero_hs_test(triplet)

    zg = zG_angular_limit(triplet)
    verdicts["zG"], constants["zG"] = zg.verdict, zg.rate_constant
    details["zG_limit"] = zg.limit.to_json()

    sq = sqrt_conformality(triplet)
    verdicts["sqrt_koenigs"], constants["sqrt_koenigs"] = sq.verdict, sq.predicted_rate
    details["sqrt_koenigs"] = sq.to_json()

    measured = rate_estimate(orbit, SQRT_T, rtol=rtol)
    if measured.status == CONVERGED and abs(measured.value) > 0:
        verdicts["orbit_rate"] = YES
    elif measured.status == DIVERGES:
        verdicts["orbit_rate"] = NO
    else:
        verdicts["orbit_rate"] = UNKNOWN
    constants["orbit_rate"] = measured.value if verdicts["orbit_rate"] == YES else None

    speed = total_speed_deviation(orbit)
    verdicts["total_speed"] = {"converges": YES, "diverges": NO}.get(speed.verdict, UNKNOWN)
    details["total_speed"] = {"verdict": speed.verdict, "limit": speed.limit.to_json(),
                              "rate_check": speed.rate_check}

    failures = []
    determined = {k: v for k, v in verdicts.items() if v != UNKNOWN}
    if len(set(determined.values())) > 1:
        failures.append(f"criteria disagree: {determined}")
    elif set(determined.values()) == {YES} and verdicts["orbit_rate"] == YES:
        for name, c in constants.items():
            if name == "orbit_rate" or c is None:
                continue
            rel = abs(c - measured.value) / abs(measured.value)
            details[f"{name}_relative_error"] = rel
            if rel > rtol:
                failures.append(f"{name} constant {c} differs from measured {measured.value} (rel {rel:.3g})")
    if speed.rate_check is not None and speed.rate_check > 1e-2:
        failures.append(f"total-speed limit inconsistent with the measured rate (off by {speed.rate_check:.3g})")
    tolerances = {"rate_rtol": rtol, "speed_atol": 1e-3, "tail_window": TAIL_WINDOW}
    return ValidationReport(verdicts, constants, measured, tolerances, details, failures)


def classify(triplet: HerglotzTriplet, orbit: Orbit | None = None, *, step_kw: dict | None = None,
             shift_kw: dict | None = None) -> ClassificationReport:
    """Full classification: type, step, shift and the extremal-rate criteria.

    Step and shift need an orbit; without one they stay undetermined unless
    they follow from the triplet alone.  ``step_kw`` and ``shift_kw`` override
    the finite-horizon thresholds of the step and shift estimators.
    """
    report = classify_algebraic(triplet)
    if report.kind != "parabolic":
        return report
    if orbit is not None and report.step == UNKNOWN:
        report.step = hyperbolic_step_estimate(orbit, triplet, **(step_kw or {})).verdict
        report.shift = shift_classify(orbit, **(shift_kw or {})).verdict
    verdict, predicted = extremal_zero_hs_test(triplet)
    report.extremal["moments"] = verdict
    zg = zG_angular_limit(triplet)
    report.extremal["zG"] = zg.verdict
    sq = sqrt_conformality(triplet)
    report.extremal["sqrt_koenigs"] = sq.verdict
    report.predicted_rate_constant = predicted or zg.rate_constant or sq.predicted_rate
    if report.step == "positive":
        report.notes.append("positive hyperbolic step: escape is at least linear, the rate is not extremal")
    if not report.criteria_agree():
        report.notes.append("extremality criteria disagree")
    return report
