"""Herglotz triplets, evaluation of the generator and its extremal-rate criteria.

A triplet ``(alpha, beta, mu)`` defines

    G(z) = alpha*z + beta + int (1 + s z)/(s - z) dmu(s),    Im z > 0,

the infinitesimal generator of a semigroup of self-maps of the upper
half-plane with Denjoy-Wolff point at infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import measure as _measure
from .limits import NO, UNKNOWN, YES, LimitEstimate, ray_limit
from .measure import Measure

BETA_TOL = 1e-9
RAY_RTOL = 1e-6
RAY_Y0 = 1.0
RAY_YMAX = 1e8


@dataclass(frozen=True)
class HerglotzTriplet:
    alpha: float = 0.0
    beta: float = 0.0
    mu: Measure = field(default_factory=Measure)

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a finite non-negative number, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def trivial(self) -> bool:
        """G identically zero: the identity semigroup."""
        return self.alpha == 0 and self.beta == 0 and self.mu.is_null

    @property
    def constant(self) -> bool:
        return self.alpha == 0 and self.mu.is_null

    @property
    def parabolic(self) -> bool:
        return self.alpha == 0

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "mu": self.mu.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "HerglotzTriplet":
        return cls(float(data.get("alpha", 0.0)), float(data.get("beta", 0.0)), Measure.from_json(data.get("mu", {})))


def _check_upper(z: complex, name: str = "z") -> complex:
    z = complex(z)
    if not z.imag > 0 or not cmath.isfinite(z):
        raise ValueError(f"{name} must lie in the upper half-plane, got {z}")
    return z


def eval_G(triplet: HerglotzTriplet, z: complex) -> complex:
    """Evaluate the generator at ``z`` (``Im z > 0``).

    Components with a finite first moment use the equivalent kernel
    ``(1+s^2)/(s-z) - s``; the ``-s`` part is folded into the constant term so
    that ``z*G(z)`` keeps full relative precision for large ``|z|``.
    """
    z = _check_upper(z)
    const = triplet.beta
    total = triplet.alpha * z
    mu = triplet.mu
    for s, w in mu.atoms:
        const -= w * s
        total += w * (1.0 + s * s) / (s - z)
    if mu.ac_parts:
        peak = [z.real, z.real - z.imag, z.real + z.imag, abs(z), -abs(z)]
        for part in mu.ac_parts:
            if part.finite_second_moment:
                const -= part.moment(1)
                total += part.integrate(lambda s: (1.0 + s * s) / (s - z), peak)
            else:
                total += part.integrate(lambda s: (1.0 + s * z) / (s - z), peak)
    return total + const


def G_function(triplet: HerglotzTriplet):
    """Return ``z -> eval_G(triplet, z)`` with a fast path for atomic measures."""
    if triplet.mu.ac_parts:
        return lambda z: eval_G(triplet, z)
    const = triplet.beta - sum(w * s for s, w in triplet.mu.atoms)
    alpha = triplet.alpha
    atoms = tuple((s, w * (1.0 + s * s)) for s, w in triplet.mu.atoms)

    def G(z: complex) -> complex:
        total = alpha * z + const
        for s, c in atoms:
            total += c / (s - z)
        return total

    return G


def geometric_ray(y0: float = RAY_Y0, y_max: float = RAY_YMAX) -> np.ndarray:
    n = int(math.floor(math.log2(y_max / y0) + 1e-12))
    return y0 * 2.0 ** np.arange(n + 1)


@dataclass(frozen=True)
class CoefficientCheck:
    alpha: LimitEstimate
    beta: float
    ok: bool


def coefficients_check(triplet: HerglotzTriplet, *, rtol: float = RAY_RTOL, y0: float = RAY_Y0,
                       y_max: float = RAY_YMAX) -> CoefficientCheck:
    """Recover ``alpha`` as the radial limit of ``G(iy)/(iy)`` and ``beta`` as ``Re G(i)``."""
    if triplet.trivial:
        raise ValueError("coefficients are undefined for the trivial generator")
    ys = geometric_ray(y0, y_max)
    G = G_function(triplet)
    ratios = [G(1j * y) / (1j * y) for y in ys]
    alpha = ray_limit(ratios, ys, rtol=rtol, atol=rtol)
    beta = G(1j).real
    scale = max(1.0, abs(triplet.alpha))
    ok = (
        alpha.converged
        and abs(alpha.value - triplet.alpha) <= rtol * scale
        and abs(beta - triplet.beta) <= rtol * max(1.0, abs(triplet.beta))
    )
    return CoefficientCheck(alpha, beta, ok)


@dataclass
class ClassificationReport:
    kind: str  # "hyperbolic", "parabolic" or "trivial"
    spectral_value: float
    step: str = UNKNOWN  # "positive", "zero", "undetermined"
    shift: str = UNKNOWN  # "finite", "infinite", "undetermined"
    extremal: dict = field(default_factory=lambda: {"moments": UNKNOWN, "zG": UNKNOWN, "sqrt_koenigs": UNKNOWN})
    predicted_rate_constant: complex | None = None
    notes: list = field(default_factory=list)

    @property
    def hyperbolic(self) -> bool:
        return self.kind == "hyperbolic"

    def criteria_agree(self) -> bool:
        determined = {v for v in self.extremal.values() if v != UNKNOWN}
        return len(determined) <= 1

    def to_json(self) -> dict:
        c = self.predicted_rate_constant
        return {
            "kind": self.kind,
            "spectral_value": self.spectral_value,
            "step": self.step,
            "shift": self.shift,
            "extremal": dict(self.extremal),
            "predicted_rate_constant": None if c is None else [c.real, c.imag],
            "notes": list(self.notes),
        }


def classify_algebraic(triplet: HerglotzTriplet) -> ClassificationReport:
    """Type of the semigroup readable directly from the triplet."""
    if triplet.trivial:
        return ClassificationReport("trivial", 0.0, notes=["G is identically zero: identity semigroup"])
    if triplet.alpha > 0:
        return ClassificationReport("hyperbolic", triplet.alpha, step="positive")
    report = ClassificationReport("parabolic", 0.0)
    if triplet.constant:
        # phi_t(z) = z + beta*t: horizontal translation.
        report.step = "positive"
        report.shift = "finite"
        report.notes.append("constant real generator: translation semigroup")
    return report


def second_moment_mass(mu: Measure) -> float:
    """``int (1 + s^2) dmu``."""
    return _measure.mass(mu) + _measure.moment(mu, 2)


def extremal_zero_hs_test(triplet: HerglotzTriplet, *, beta_tol: float = BETA_TOL):
    """Moment criterion for extremal rate in the zero-step parabolic case.

    Returns ``(verdict, predicted_limit)`` where ``predicted_limit`` is the
    limit of ``phi_t(z)/sqrt(t)`` when the verdict is ``yes``.
    """
    if triplet.alpha > 0:
        raise ValueError("the moment criterion applies to parabolic generators (alpha = 0) only")
    if triplet.trivial:
        raise ValueError("the trivial generator has no rate of convergence")
    mu = triplet.mu
    if not mu.finite_second_moment:
        return NO, None
    if abs(triplet.beta - _measure.moment(mu, 1)) > beta_tol:
        return NO, None
    if mu.is_null:
        return NO, None
    return YES, 1j * math.sqrt(2.0 * second_moment_mass(mu))


@dataclass(frozen=True)
class ZGLimit:
    limit: LimitEstimate
    verdict: str
    rate: float | None

    @property
    def rate_constant(self) -> complex | None:
        return None if self.rate is None else 1j * self.rate


def zG_angular_limit(triplet: HerglotzTriplet, *, rtol: float = RAY_RTOL, y0: float = RAY_Y0,
                     y_max: float = RAY_YMAX) -> ZGLimit:
    """Radial limit of ``z G(z)`` along ``z = iy``.

    Extremal iff the limit is a negative real; the rate ``lim |phi_t|/sqrt(t)``
    is then ``sqrt(-2 * limit)``.
    """
    if triplet.alpha > 0:
        raise ValueError("the zG criterion applies to parabolic generators (alpha = 0) only")
    if triplet.trivial:
        raise ValueError("the trivial generator has no rate of convergence")
    ys = geometric_ray(y0, y_max)
    G = G_function(triplet)
    vals = [1j * y * G(1j * y) for y in ys]
    est = ray_limit(vals, ys, rtol=rtol)
    if est.converged:
        L = est.value
        if L.real < 0 and abs(L.imag) <= rtol * abs(L) + est.error_indicator:
            return ZGLimit(est, YES, math.sqrt(-2.0 * L.real))
        return ZGLimit(est, NO, None)
    if est.status in ("diverges", "zero"):
        return ZGLimit(est, NO, None)
    return ZGLimit(est, UNKNOWN, None)
