"""Hyperbolic distance in the upper half-plane and the slit plane, and total speed."""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass

import numpy as np

from .limits import CONVERGED, DIVERGES, LimitEstimate, scalar_tail_limit

# Below this pseudo-hyperbolic distance atanh is used directly; above it the
# log((A+B)^2 / (4 Im z Im w)) form avoids the 1 - rho cancellation.
_RHO_SWITCH = 0.5


def _upper(z, name):
    z = complex(z)
    if not z.imag > 0 or not cmath.isfinite(z):
        raise ValueError(f"{name} must lie in the upper half-plane, got {z}")
    return z


def dist_H(z: complex, w: complex) -> float:
    """Hyperbolic distance in the upper half-plane (curvature -4 normalization).

    ``d = 1/2 log((1+rho)/(1-rho))`` with ``rho = |z-w|/|z-conj(w)|``.
    """
    z = _upper(z, "z")
    w = _upper(w, "w")
    near = abs(z - w)
    far = abs(z - w.conjugate())
    rho = near / far
    if rho < _RHO_SWITCH:
        return math.atanh(rho)
    # (far + near)/(far - near) = (far + near)^2 / (4 Im z Im w)
    return math.log((far + near) / (2.0 * math.sqrt(z.imag * w.imag)))


def _slit_chart(a: complex, name: str) -> complex:
    a = complex(a)
    if a.imag == 0 and a.real <= 0 or not cmath.isfinite(a):
        raise ValueError(f"{name} lies on the slit (-inf, 0], got {a}")
    return 1j * cmath.sqrt(a)


def dist_K(a: complex, b: complex) -> float:
    """Hyperbolic distance in K = C minus (-inf, 0] via the chart ``w -> i sqrt(w)``."""
    return dist_H(_slit_chart(a, "a"), _slit_chart(b, "b"))


ZERO_HS = "zero_hs"
PHS = "phs"
HYPERBOLIC = "hyperbolic"


def normalizer(mode: str, t: np.ndarray, lam: float | None = None) -> np.ndarray:
    if mode == ZERO_HS:
        return 0.25 * np.log(t)
    if mode == PHS:
        return np.log(t)
    if mode == HYPERBOLIC:
        if lam is None or lam <= 0:
            raise ValueError("hyperbolic mode needs the spectral value lambda > 0")
        return 0.5 * lam * t
    raise ValueError(f"unknown speed mode {mode!r}")


@dataclass(frozen=True)
class SpeedDeviationSeries:
    mode: str
    t: np.ndarray
    deviation: np.ndarray
    limit: LimitEstimate
    rate_check: float | None = None  # |limit - 1/2 log(lim |phi_t(i)|/sqrt t)| in zero_hs mode

    @property
    def verdict(self) -> str:
        if self.limit.status == CONVERGED:
            return "converges"
        if self.limit.status == DIVERGES:
            return "diverges"
        return "undetermined"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["t", "deviation"])
            for t, d in zip(self.t, self.deviation):
                out.writerow([repr(float(t)), repr(float(d))])


def total_speed_deviation(
    orbit,
    mode: str = ZERO_HS,
    *,
    lam: float | None = None,
    atol: float = 1e-3,
    window: int = 8,
    min_horizon: float = 1e6,
    divergence_level: float = 5.0,
) -> SpeedDeviationSeries:
    """Deviation of ``d_H(i, phi_t(z))`` from its normalizer along an orbit.

    The limit is declared convergent when the last ``window`` deviations agree
    to ``atol``; divergent once the deviation keeps increasing and exceeds
    ``divergence_level``.  Orbits shorter than ``min_horizon`` (not used in
    hyperbolic mode) give an undetermined verdict.
    """
    t = np.asarray(orbit.times, dtype=float)
    vals = np.asarray(orbit.values, dtype=complex)
    mask = t > 0
    t, vals = t[mask], vals[mask]
    d = np.array([dist_H(1j, v) for v in vals])
    dev = d - normalizer(mode, t, lam)
    if mode != HYPERBOLIC and t[-1] < min_horizon:
        lim = LimitEstimate(complex(dev[-1]), False, math.inf, (), "undetermined")
    else:
        lim = scalar_tail_limit(dev, atol=atol, window=window, inf_threshold=divergence_level)
    rate_check = None
    if mode == ZERO_HS and lim.converged:
        predicted = 0.5 * math.log(abs(vals[-1]) / math.sqrt(t[-1]))
        rate_check = abs(lim.value.real - predicted)
    return SpeedDeviationSeries(mode, t, dev, lim, rate_check)
