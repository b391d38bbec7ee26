"""Dormand-Prince 5(4) stepping for a single complex unknown.

Every stage must stay in the open upper half-plane; a step whose stages leave
it is rejected and retried with a smaller step, so the vector field is never
evaluated outside its domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

# Butcher tableau (Dormand & Prince 1980); the seventh stage is the FSAL stage.
NODES = (1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
ROWS = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
WEIGHTS = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
ERROR = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    pass


@dataclass
class StepStats:
    steps: int = 0
    rejections: int = 0
    max_local_error: float = 0.0

    def to_json(self) -> dict:
        return {"steps": self.steps, "rejections": self.rejections, "max_local_error": self.max_local_error}


def _in_domain(*ys: complex) -> bool:
    for y in ys:
        if not (y.imag > 0.0) or not math.isfinite(y.real) or not math.isfinite(y.imag):
            return False
    return True


def integrate_segment(
    f: Callable[[float, complex], complex],
    u0: float,
    y0: complex,
    u1: float,
    h: float,
    *,
    rtol: float,
    atol: float,
    stats: StepStats,
    max_steps: int = 1_000_000,
) -> tuple[complex, float]:
    """Advance ``y' = f(u, y)`` from ``u0`` to ``u1``; returns ``(y(u1), next_h)``."""
    u, y = u0, y0
    if u1 <= u0:
        return y, h
    k1 = f(u, y)
    h = min(h, u1 - u0)
    min_h = 1e-14 * max(1.0, abs(u1))
    last_h = h
    while u < u1:
        if stats.steps + stats.rejections > max_steps:
            raise IntegrationError(f"step budget exhausted at u={u:.6g}, y={y!r}")
        final = u + h >= u1
        if final:
            h = u1 - u
        ks = [k1]
        for c, row in zip(NODES, ROWS):
            yi = y + h * sum(a * k for a, k in zip(row, ks))
            if not _in_domain(yi):
                break
            ks.append(f(u + c * h, yi))
        else:
            y_new = y + h * sum(b * k for b, k in zip(WEIGHTS, ks))
        if len(ks) < 6 or not _in_domain(y_new):
            # A stage left the half-plane: shrink hard and retry.
            stats.rejections += 1
            h *= 0.25
            if h < min_h:
                raise IntegrationError(f"step size underflow near the real axis at u={u:.6g}, y={y!r}")
            continue
        k7 = f(u + h, y_new)
        ks.append(k7)
        err = abs(h * sum(e * k for e, k in zip(ERROR, ks)))
        scale = atol + rtol * max(abs(y), abs(y_new))
        ratio = err / scale
        if not math.isfinite(ratio):
            raise IntegrationError(f"non-finite error estimate at u={u:.6g}, y={y!r}")
        if ratio <= 1.0:
            stats.steps += 1
            stats.max_local_error = max(stats.max_local_error, err / max(abs(y_new), 1e-300))
            u = u1 if final else u + h
            y, k1 = y_new, k7
            if not final:
                last_h = h
            h *= MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2)
        else:
            stats.rejections += 1
            h *= max(MIN_FACTOR, SAFETY * ratio ** -0.2)
            if h < min_h:
                raise IntegrationError(f"step size underflow at u={u:.6g}, y={y!r} (tolerance not met)")
    return y, max(h, last_h)
