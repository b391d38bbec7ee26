"""Numerical limit detection on sampled sequences.

Two flavours are used throughout the package:

* ``ray_limit`` for quantities sampled on a geometric grid ``y_k -> inf`` that
  converge like ``1/y``: one Richardson step, then a Cauchy test on a window
  of successive extrapolated values.
* ``tail_limit`` for orbit-derived quantities: a plain Cauchy test on the
  last samples of a time grid, with an infinity flag for monotone blow-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

CONVERGED = "converged"
ZERO = "zero"
DIVERGES = "diverges"
UNDETERMINED = "undetermined"

# Verdicts shared by every criterion.
YES = "yes"
NO = "no"
UNKNOWN = "undetermined"


@dataclass(frozen=True)
class LimitEstimate:
    value: complex
    converged: bool
    error_indicator: float
    grid_tail: tuple = field(default=(), repr=False)
    status: str = UNDETERMINED

    @property
    def infinite(self) -> bool:
        return self.status == DIVERGES

    @property
    def nonzero(self) -> bool:
        return self.converged and abs(self.value) > 0

    def to_json(self) -> dict:
        v = self.value
        return {
            "status": self.status,
            "converged": self.converged,
            "value": None if not np.isfinite(v) else [v.real, v.imag],
            "error_indicator": self.error_indicator if math.isfinite(self.error_indicator) else None,
        }


def _spread(block: np.ndarray) -> float:
    return float(np.max(np.abs(block[:, None] - block[None, :])))


def _trend(mags: np.ndarray, grid: np.ndarray, growth: float):
    """Classify a monotone tail as blowing up or decaying to zero."""
    if mags.size < 3 or np.any(~np.isfinite(mags)):
        return None
    ratios = mags[1:] / np.maximum(mags[:-1], 1e-300)
    if np.all(ratios >= growth):
        return DIVERGES
    if np.all(ratios <= 1.0 / growth) and mags[-1] < mags[0]:
        return ZERO
    return None


def ray_limit(
    values,
    grid,
    *,
    rtol: float = 1e-6,
    atol: float = 0.0,
    window: int = 4,
    richardson: bool = True,
    growth: float = 1.01,
) -> LimitEstimate:
    """Limit of ``values[k]`` sampled at increasing ``grid[k]``, assuming ``O(1/y)`` error."""
    v = np.asarray(values, dtype=complex)
    y = np.asarray(grid, dtype=float)
    if v.size != y.size or v.size < window + 1:
        raise ValueError("need at least window+1 samples on a matching grid")
    if richardson:
        q = y[1:] / y[:-1]
        ext = (q * v[1:] - v[:-1]) / (q - 1.0)
    else:
        ext = v
    tail = tuple(complex(x) for x in v[-window:])

    # Latest window of extrapolated values that passes the Cauchy test.
    for end in range(ext.size, window - 1, -1):
        block = ext[end - window:end]
        if not np.all(np.isfinite(block)):
            continue
        spread = _spread(block)
        scale = float(np.max(np.abs(block)))
        if spread <= rtol * scale + atol:
            return LimitEstimate(complex(block[-1]), True, spread, tail, CONVERGED)
        if end < ext.size - window:
            break  # only accept windows reaching into the last few grid points

    trend = _trend(np.abs(v[-(window + 1):]), y[-(window + 1):], growth)
    if trend == DIVERGES:
        return LimitEstimate(complex(math.inf, 0.0), False, math.inf, tail, DIVERGES)
    if trend == ZERO:
        return LimitEstimate(0j, False, float(abs(v[-1])), tail, ZERO)
    last = ext[-window:]
    err = _spread(last) if np.all(np.isfinite(last)) else math.inf
    return LimitEstimate(complex(v[-1]), False, err, tail, UNDETERMINED)


def tail_limit(
    values,
    *,
    rtol: float = 1e-3,
    window: int = 8,
    inf_threshold: float = 1e3,
) -> LimitEstimate:
    """Limit of the last ``window`` entries of a sequence (plain Cauchy test).

    Modulus and argument are tested separately so a rotating sequence with a
    settled modulus is not declared convergent.  A tail whose modulus exceeds
    ``inf_threshold`` while increasing monotonically is flagged infinite.
    """
    v = np.asarray(values, dtype=complex)
    if v.size < window:
        return LimitEstimate(complex(v[-1]) if v.size else 0j, False, math.inf, (), UNDETERMINED)
    block = v[-window:]
    tail = tuple(complex(x) for x in block)
    if not np.all(np.isfinite(block)):
        return LimitEstimate(complex(math.inf, 0.0), False, math.inf, tail, DIVERGES)
    mags = np.abs(block)
    if mags[-1] > inf_threshold and np.all(np.diff(mags) > 0):
        return LimitEstimate(complex(math.inf, 0.0), False, math.inf, tail, DIVERGES)
    mod_err = float((mags.max() - mags.min()) / max(mags.max(), 1e-300))
    args = np.unwrap(np.angle(block))
    arg_err = float(args.max() - args.min())
    err = max(mod_err, arg_err)
    status = CONVERGED if err <= rtol else UNDETERMINED
    return LimitEstimate(complex(block[-1]), status == CONVERGED, err, tail, status)


def scalar_tail_limit(values, *, atol: float, window: int = 8, inf_threshold: float = math.inf) -> LimitEstimate:
    """Absolute-tolerance Cauchy test for real sequences (deviations, distances)."""
    v = np.asarray(values, dtype=float)
    if v.size < window:
        return LimitEstimate(complex(v[-1]) if v.size else 0j, False, math.inf, (), UNDETERMINED)
    block = v[-window:]
    tail = tuple(float(x) for x in block)
    if block[-1] > inf_threshold and np.all(np.diff(block) > 0):
        return LimitEstimate(complex(math.inf, 0.0), False, math.inf, tail, DIVERGES)
    err = float(block.max() - block.min())
    status = CONVERGED if err <= atol else UNDETERMINED
    return LimitEstimate(complex(block[-1]), status == CONVERGED, err, tail, status)

