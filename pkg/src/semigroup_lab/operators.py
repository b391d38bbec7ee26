"""Transfer to the unit disc and norm envelopes of the composition operators.

With ``S(z) = i(tau + z)/(tau - z)`` the semigroup on the half-plane becomes
``psi_t = S^{-1} o phi_t o S`` on the disc, with Denjoy-Wolff point ``tau``.
``psi_t(0)`` is the image of the half-plane orbit of ``i``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .flow import Orbit
from .limits import NO, UNKNOWN, YES, LimitEstimate, ray_limit, scalar_tail_limit

TO_HALFPLANE = "to_halfplane"
TO_DISC = "to_disc"
HARDY = "hardy"
BERGMAN = "bergman"
PRODUCT_LIMIT = 2.0


def _unimodular(tau: complex) -> complex:
    tau = complex(tau)
    if abs(abs(tau) - 1.0) > 1e-12:
        raise ValueError(f"tau must be unimodular, got {tau}")
    return tau


def cayley(tau: complex, direction: str, point: complex) -> complex:
    """``S`` (disc to half-plane) or ``S^{-1}(w) = tau (w - i)/(w + i)``."""
    tau = _unimodular(tau)
    point = complex(point)
    if direction == TO_HALFPLANE:
        if not abs(point) < 1:
            raise ValueError(f"point must lie in the unit disc, got {point}")
        return 1j * (tau + point) / (tau - point)
    if direction == TO_DISC:
        if not point.imag > 0:
            raise ValueError(f"point must lie in the upper half-plane, got {point}")
        return tau * (point - 1j) / (point + 1j)
    raise ValueError(f"direction must be {TO_HALFPLANE!r} or {TO_DISC!r}")


def one_minus_abs(w: complex) -> float:
    """``1 - |S^{-1}(w)|`` without cancellation: ``1 - |psi|^2 = 4 Im w / |w + i|^2``."""
    one_minus_sq = 4.0 * w.imag / abs(w + 1j) ** 2
    return one_minus_sq / (1.0 + math.sqrt(max(0.0, 1.0 - one_minus_sq)))


@dataclass(frozen=True)
class DiscOrbit:
    tau: complex
    times: np.ndarray
    values: np.ndarray  # psi_t samples in the disc
    one_minus_abs: np.ndarray
    distance_to_tau: np.ndarray  # |psi_t - tau| = 2/|w + i|
    halfplane_modulus: np.ndarray  # |phi_t| of the source orbit

    @property
    def product(self) -> np.ndarray:
        """``|psi_t - tau| |phi_t|``; tends to 2."""
        return self.distance_to_tau * self.halfplane_modulus


def conjugate_orbit(orbit: Orbit, tau: complex = 1.0) -> DiscOrbit:
    tau = _unimodular(tau)
    w = orbit.values
    psi = np.array([cayley(tau, TO_DISC, x) for x in w])
    oma = np.array([one_minus_abs(complex(x)) for x in w])
    dist = 2.0 / np.abs(w + 1j)
    return DiscOrbit(tau, orbit.times.copy(), psi, oma, dist, np.abs(w))


def product_check(disc: DiscOrbit, *, atol: float = 1e-3, window: int = 4) -> LimitEstimate:
    """Limit of ``|psi_t - tau| |phi_t|``.

    The product equals ``2|w|/|w + i|``, whose defect decays like ``1/|w|``
    (only ``1/sqrt(t)`` in the zero-step case), so the samples are
    extrapolated in ``1/|phi_t|`` before the Cauchy test.
    """
    mask = disc.times >= 1.0
    grid = disc.halfplane_modulus[mask]
    vals = disc.product[mask]
    if grid.size > window and np.all(np.diff(grid) > 0):
        return ray_limit(vals, grid, rtol=0.0, atol=atol, window=window)
    return scalar_tail_limit(vals, atol=atol, window=window)


def _check_r(r: float) -> float:
    if not 0.0 <= r < 1.0:
        raise ValueError(f"|g(0)| must lie in [0, 1), got {r}")
    return float(r)


def _envelope(r: float, exponent: float) -> tuple[float, float]:
    # log forms stay accurate as r -> 1
    lo = -exponent * math.log1p(-r * r)
    hi = exponent * (math.log1p(r) - math.log1p(-r))
    return math.exp(lo), math.exp(hi)


def hardy_bounds(r: float, p: float) -> tuple[float, float]:
    """Norm envelope of ``C_g`` on ``H^p`` in terms of ``r = |g(0)|``."""
    if p < 1:
        raise ValueError("p must be at least 1")
    return _envelope(_check_r(r), 1.0 / p)


def bergman_bounds(r: float, p: float) -> tuple[float, float]:
    """Norm envelope of ``C_g`` on ``A^p``: the Hardy envelope squared."""
    if p < 1:
        raise ValueError("p must be at least 1")
    return _envelope(_check_r(r), 2.0 / p)


@dataclass(frozen=True)
class NormGrowth:
    space: str
    p: float
    times: np.ndarray
    one_minus_abs_psi: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    ratio_lower: np.ndarray
    ratio_upper: np.ndarray
    verdict: str  # bounded / unbounded / undetermined
    bound: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["t", "one_minus_abs_psi", "envelope_lower", "envelope_upper", "ratio_lower", "ratio_upper"])
            for row in zip(self.times, self.one_minus_abs_psi, self.lower, self.upper, self.ratio_lower,
                           self.ratio_upper):
                out.writerow([repr(float(x)) for x in row])


def norm_growth_check(
    disc: DiscOrbit,
    p: float,
    space: str = HARDY,
    *,
    t_min: float = 10.0,
    t_max: float = math.inf,
    bound: float = 20.0,
    min_samples: int = 4,
) -> NormGrowth:
    """Envelope^p divided by ``sqrt(t)`` (Hardy) or ``t`` (Bergman) on ``t_min <= t <= t_max``.

    Bounded when both envelope ends stay in ``[1/bound, bound]``; unbounded
    when the upper ratio leaves that band upward and keeps increasing.  The
    envelopes are evaluated in log form because ``|psi_t(0)|`` is extremely
    close to 1 at large times.
    """
    if space not in (HARDY, BERGMAN):
        raise ValueError(f"space must be {HARDY!r} or {BERGMAN!r}")
    mask = (disc.times >= t_min) & (disc.times <= t_max)
    t = disc.times[mask]
    oma = disc.one_minus_abs[mask]
    e = (1.0 if space == HARDY else 2.0) / p
    # r = 1 - oma; 1 - r^2 = oma (2 - oma); (1+r)/(1-r) = (2 - oma)/oma
    log_lo = -e * np.log(oma * (2.0 - oma))
    log_hi = e * (np.log(2.0 - oma) - np.log(oma))
    norm_t = 0.5 * np.log(t) if space == HARDY else np.log(t)
    ratio_lo = np.exp(p * log_lo - norm_t)
    ratio_hi = np.exp(p * log_hi - norm_t)
    if t.size < min_samples:
        verdict = UNKNOWN
    elif np.all((ratio_lo >= 1 / bound) & (ratio_hi <= bound)):
        verdict = "bounded"
    elif ratio_hi[-1] > bound and np.all(np.diff(ratio_hi[-min_samples:]) > 0):
        verdict = "unbounded"
    else:
        verdict = UNKNOWN
    return NormGrowth(space, p, t, oma, np.exp(log_lo), np.exp(log_hi), ratio_lo, ratio_hi, verdict, bound)


@dataclass(frozen=True)
class DiscRates:
    distance_limit: LimitEstimate  # sqrt(t) |psi_t - tau|
    boundary_limit: LimitEstimate  # sqrt(t) (1 - |psi_t|)
    orthogonality: LimitEstimate  # (1 - |psi_t|) / |psi_t - tau|
    verdict: str


def disc_rates(disc: DiscOrbit, *, rtol: float = 1e-3, window: int = 8) -> DiscRates:
    """The disc counterparts of the extremal rate: both scaled sequences converge together."""
    mask = disc.times >= 1.0
    st = np.sqrt(disc.times[mask])
    a = st * disc.distance_to_tau[mask]
    b = st * disc.one_minus_abs[mask]
    c = disc.one_minus_abs[mask] / disc.distance_to_tau[mask]
    la = scalar_tail_limit(a, atol=rtol * max(abs(a[-1]), 1e-300), window=window)
    lb = scalar_tail_limit(b, atol=rtol * max(abs(b[-1]), 1e-300), window=window)
    lc = scalar_tail_limit(c, atol=rtol, window=window)
    if la.converged and lb.converged and a[-1] > 0 and b[-1] > 0:
        verdict = YES
    elif a.size >= window and np.all(np.diff(a[-window:]) < 0) and np.all(np.diff(b[-window:]) < 0):
        verdict = NO
    else:
        verdict = UNKNOWN
    return DiscRates(la, lb, lc, verdict)
