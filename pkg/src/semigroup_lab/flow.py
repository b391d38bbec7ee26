"""Orbits of the semigroup: numerical integration of ``dphi/dt = G(phi)``.

Integration runs in the logarithmic time ``u = log(1 + t)``, where the field
becomes ``(1 + t) G(phi)``; orbits escaping like ``sqrt(t)`` are then smooth
in ``u`` and a horizon of ``t = 1e8`` costs a few thousand steps.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .generator import HerglotzTriplet, G_function
from .measure import Measure
from .hypgeom import dist_H
from .limits import UNKNOWN, LimitEstimate, scalar_tail_limit
from .ode import IntegrationError, StepStats, integrate_segment

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-14
STEP_THRESHOLD = 1e-4
STEP_HORIZON = 1e4

__all__ = [
    "IntegrationError", "ClosedFormError", "Schedule", "Orbit", "integrate_orbit", "closed_form_orbit",
    "flow_map", "semigroup_residual", "hyperbolic_step_estimate", "shift_classify", "family_triplet",
    "CLOSED_FORM_FAMILIES",
]

CLOSED_FORM_FAMILIES = ("linear", "constant", "inverse", "two_atom")


class ClosedFormError(RuntimeError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Sampling times, always starting at ``t = 0``."""

    times: tuple[float, ...]
    kind: str = "custom"

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        if not ts or ts[0] != 0.0:
            ts = (0.0, *ts)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("schedule times must be strictly increasing")
        object.__setattr__(self, "times", ts)

    @classmethod
    def geometric(cls, t_max: float, ratio: float = 2.0, first: float = 1.0) -> "Schedule":
        """``0, first, first*ratio, ...`` up to and including ``t_max``."""
        if t_max < first:
            return cls((0.0, t_max), "geometric")
        ts = [0.0]
        t = first
        while t < t_max * (1 - 1e-12):
            ts.append(t)
            t *= ratio
        ts.append(float(t_max))
        return cls(tuple(ts), "geometric")

    @classmethod
    def uniform(cls, t_max: float, n: int) -> "Schedule":
        return cls(tuple(np.linspace(0.0, t_max, n + 1)), "uniform")

    @property
    def t_max(self) -> float:
        return self.times[-1]

    def describe(self) -> dict:
        return {"kind": self.kind, "points": len(self.times), "t_max": self.t_max}


@dataclass(frozen=True)
class Orbit:
    z0: complex
    times: np.ndarray
    values: np.ndarray
    schedule: dict = field(default_factory=dict)
    stats: StepStats = field(default_factory=StepStats)

    @property
    def samples(self) -> list[tuple[float, complex]]:
        return [(float(t), complex(v)) for t, v in zip(self.times, self.values)]

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def value_at(self, t: float) -> complex:
        idx = np.flatnonzero(self.times == t)
        if not idx.size:
            raise KeyError(f"t={t} is not a sample time of this orbit")
        return complex(self.values[idx[0]])

    def julia_defect(self) -> float:
        """Largest decrease of ``Im phi_t`` between consecutive samples (0 when monotone)."""
        drops = -np.diff(self.values.imag)
        return float(max(0.0, drops.max())) if drops.size else 0.0

    def rows(self):
        for t, v in zip(self.times, self.values):
            v = complex(v)
            yield [repr(float(t)), repr(v.real), repr(v.imag), repr(abs(v)), repr(cmath.phase(v))]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["t", "re", "im", "abs", "arg"])
            out.writerows(self.rows())


def _upper(z: complex) -> complex:
    z = complex(z)
    if not z.imag > 0 or not cmath.isfinite(z):
        raise ValueError(f"start point must lie in the upper half-plane, got {z}")
    return z


def integrate_orbit(
    triplet: HerglotzTriplet,
    z0: complex,
    schedule: Schedule | None = None,
    *,
    t_max: float = 1e4,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> Orbit:
    """Sample ``t -> phi_t(z0)`` on ``schedule`` (default: doubling grid up to ``t_max``)."""
    z0 = _upper(z0)
    if triplet.trivial:
        raise ValueError("G is identically zero; the identity semigroup has no orbit to integrate")
    if schedule is None:
        schedule = Schedule.geometric(t_max)
    G = G_function(triplet)

    def field_u(u: float, y: complex) -> complex:
        return math.exp(u) * G(y)

    stats = StepStats()
    values = [z0]
    y, h = z0, 1e-3
    u_prev = 0.0
    for t in schedule.times[1:]:
        u = math.log1p(t)
        y, h = integrate_segment(field_u, u_prev, y, u, h, rtol=rtol, atol=atol, stats=stats)
        values.append(y)
        u_prev = u
    return Orbit(z0, np.array(schedule.times), np.array(values, dtype=complex), schedule.describe(), stats)


def flow_map(triplet: HerglotzTriplet, z: complex, t: float, *, rtol: float = DEFAULT_RTOL,
             atol: float = DEFAULT_ATOL) -> complex:
    """``phi_t(z)`` for a single time."""
    if t == 0:
        return _upper(z)
    orbit = integrate_orbit(triplet, z, Schedule((0.0, t)), rtol=rtol, atol=atol)
    return complex(orbit.values[-1])


def _sqrt_upper(w: complex) -> complex:
    r = cmath.sqrt(w)
    return -r if r.imag < 0 else r


def _two_atom_solve(target: complex, guess: complex, max_iter: int = 60) -> complex:
    """Solve ``1/2 log(p) - p^2/4 = target`` for ``p`` in the upper half-plane by Newton."""
    p = guess
    for _ in range(max_iter):
        F = 0.5 * cmath.log(p) - 0.25 * p * p - target
        step = F * 2.0 * p / (1.0 - p * p)  # F / F'
        p_new = p - step
        if p_new.imag <= 0:
            p_new = complex(p.real, 0.5 * p.imag) if p.imag > 0 else p_new
        if abs(p_new - p) <= 1e-15 * abs(p_new):
            return p_new
        p = p_new
    if abs(0.5 * cmath.log(p) - 0.25 * p * p - target) <= 1e-13 * max(1.0, abs(target)):
        return p
    raise ClosedFormError(f"Newton iteration did not converge for target {target!r}")


def closed_form_orbit(family: str, params: dict, z0: complex, schedule: Schedule) -> Orbit:
    """Exact orbits for the reference families.

    ``linear`` (lam): e^{lam t} z0;  ``constant`` (c, Im c >= 0): z0 + c t;
    ``inverse`` (m): sqrt(z0^2 - 2 m t);  ``two_atom``: the implicit relation
    ``1/2 log(phi) - phi^2/4 = 1/2 log(z0) - z0^2/4 + t`` solved by Newton.
    """
    z0 = _upper(z0)
    ts = np.array(schedule.times, dtype=float)
    if family == "linear":
        vals = [cmath.exp(params["lam"] * t) * z0 for t in ts]
    elif family == "constant":
        c = complex(params["c"])
        if c.imag < 0:
            raise ValueError("a constant generator must take values in the closed upper half-plane")
        vals = [z0 + c * t for t in ts]
    elif family == "inverse":
        m = float(params["m"])
        vals = [_sqrt_upper(z0 * z0 - 2.0 * m * t) for t in ts]
    elif family == "two_atom":
        base = 0.5 * cmath.log(z0) - 0.25 * z0 * z0
        vals = [z0]
        p, t_prev = z0, 0.0
        for i, t in enumerate(ts[1:], start=1):
            # Continuation in t with substeps short enough for Newton to lock on.
            while t_prev < t:
                dt = min(t - t_prev, max(0.05, 0.1 * abs(p) ** 2))
                guess = p + dt * 2.0 * p / (1.0 - p * p)
                if guess.imag <= 0:
                    guess = complex(p.real, p.imag * 1.5)
                try:
                    p = _two_atom_solve(base + t_prev + dt, guess)
                except ClosedFormError as exc:
                    raise ClosedFormError(f"two_atom sample {i} (t={t}): {exc}") from exc
                t_prev += dt
            t_prev = t
            vals.append(p)
    else:
        raise ValueError(f"unknown closed-form family {family!r}")
    return Orbit(z0, ts, np.array(vals, dtype=complex), {**schedule.describe(), "closed_form": family})


def family_triplet(family: str, params: dict) -> HerglotzTriplet:
    """Herglotz triplet of a closed-form family.

    A constant ``c = a + ib`` with ``b > 0`` is realized as ``beta = a`` plus
    a Cauchy measure of weight ``b``, whose integral term is identically ``ib``.
    """
    if family == "linear":
        lam = float(params["lam"])
        if not lam > 0:
            raise ValueError("linear family needs lam > 0")
        return HerglotzTriplet(lam, 0.0, Measure())
    if family == "constant":
        c = complex(params["c"])
        if c.imag < 0:
            raise ValueError("a constant generator must take values in the closed upper half-plane")
        mu = Measure.cauchy(0.0, 1.0, c.imag) if c.imag > 0 else Measure()
        return HerglotzTriplet(0.0, c.real, mu)
    if family == "inverse":
        m = float(params["m"])
        if not m > 0:
            raise ValueError("inverse family needs m > 0")
        return HerglotzTriplet(0.0, 0.0, Measure.atom(0.0, m))
    if family == "two_atom":
        return HerglotzTriplet(0.0, 0.0, Measure(((1.0, 0.5), (-1.0, 0.5))))
    raise ValueError(f"unknown closed-form family {family!r}; expected one of {CLOSED_FORM_FAMILIES}")


def semigroup_residual(triplet: HerglotzTriplet, z: complex, s: float, t: float, *,
                       rtol: float = DEFAULT_RTOL) -> float:
    """``|phi_{t+s}(z) - phi_t(phi_s(z))| / (1 + |phi_{t+s}(z)|)`` from three integrations."""
    if s < 0 or t < 0:
        raise ValueError("semigroup times must be non-negative")
    direct = flow_map(triplet, z, s + t, rtol=rtol)
    composed = flow_map(triplet, flow_map(triplet, z, s, rtol=rtol), t, rtol=rtol)
    return abs(direct - composed) / (1.0 + abs(direct))


@dataclass(frozen=True)
class StepEstimate:
    limit: LimitEstimate
    verdict: str  # "positive", "zero", "undetermined"
    times: np.ndarray
    distances: np.ndarray


def hyperbolic_step_estimate(
    orbit: Orbit,
    triplet: HerglotzTriplet,
    *,
    threshold: float = STEP_THRESHOLD,
    horizon: float = STEP_HORIZON,
    window: int = 4,
    rtol: float = DEFAULT_RTOL,
) -> StepEstimate:
    """Sequence ``d_H(phi_{t+1}(z), phi_t(z))`` along the orbit samples.

    Each ``phi_{t+1}`` is obtained by integrating one more unit of time from
    the stored sample.  Zero step: the tail is decreasing and ends below
    ``threshold``.  Positive step: the tail settles (relative spread 1e-3)
    above ``threshold``.
    """
    mask = orbit.times >= 1.0
    ts = orbit.times[mask]
    d = np.array([dist_H(v, flow_map(triplet, v, 1.0, rtol=rtol)) for v in orbit.values[mask]])
    if orbit.t_max < horizon or d.size < window:
        return StepEstimate(LimitEstimate(complex(d[-1]) if d.size else 0j, False, math.inf), UNKNOWN, ts, d)
    tail = d[-window:]
    if tail[-1] < threshold and np.all(np.diff(tail) < 0):
        return StepEstimate(LimitEstimate(0j, False, float(tail[-1]), tuple(tail), "zero"), "zero", ts, d)
    lim = scalar_tail_limit(d, atol=1e-3 * float(tail.max()), window=window)
    if lim.converged and tail[-1] >= threshold:
        return StepEstimate(lim, "positive", ts, d)
    return StepEstimate(lim, UNKNOWN, ts, d)


@dataclass(frozen=True)
class ShiftResult:
    verdict: str  # "finite", "infinite", "undetermined"
    sup_im: float


def shift_classify(orbit: Orbit, *, rtol: float = 1e-6, growth: float = 1.5) -> ShiftResult:
    """Finite shift when ``Im phi_t`` has settled over the last decade of time."""
    t_last = orbit.t_max
    im = orbit.values.imag
    earlier = np.flatnonzero(orbit.times <= t_last / 10.0)
    if t_last < 10.0 or not earlier.size:
        return ShiftResult(UNKNOWN, float(im[-1]))
    im_then = im[earlier[-1]]
    im_now = im[-1]
    if (im_now - im_then) <= rtol * im_now:
        return ShiftResult("finite", float(im_now))
    if im_now >= growth * im_then:
        return ShiftResult("infinite", float(im_now))
    return ShiftResult(UNKNOWN, float(im_now))
