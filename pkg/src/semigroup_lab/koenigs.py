"""Koenigs functions obtained by integrating ``1/G`` and the conformality tests.

For a parabolic generator the Abel equation ``h o phi_t = h + t`` gives
``h' = 1/G``; for a hyperbolic one Schroeder's equation ``h o phi_t = e^{lam t} h``
gives ``h'/h = lam/G``.  Both are evaluated by adaptive Gauss-Kronrod
quadrature along polylines in the upper half-plane.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .flow import flow_map
from .generator import RAY_RTOL, HerglotzTriplet, G_function, geometric_ray
from .limits import CONVERGED, DIVERGES, NO, UNKNOWN, YES, ZERO, LimitEstimate, ray_limit
from .quadrature import adaptive_gk

PARABOLIC = "parabolic"
HYPERBOLIC = "hyperbolic"
PATH_RTOL = 1e-13
# |G| below this on the path means the integrand is unreliable.
G_FLOOR = 1e-12


class KoenigsError(RuntimeError):
    pass


@dataclass(frozen=True)
class KoenigsChart:
    """Normalization of a Koenigs function: ``h(z0) = anchor``."""

    kind: str
    z0: complex
    anchor: complex
    lam: float = 0.0

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "z0": [self.z0.real, self.z0.imag],
            "anchor": [self.anchor.real, self.anchor.imag],
            "lambda": self.lam,
        }


def make_chart(triplet: HerglotzTriplet, z0: complex = 1j) -> KoenigsChart:
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ValueError(f"base point must lie in the upper half-plane, got {z0}")
    if triplet.trivial:
        raise ValueError("the identity semigroup has no Koenigs function")
    if triplet.alpha > 0:
        return KoenigsChart(HYPERBOLIC, z0, 1j, triplet.alpha)
    return KoenigsChart(PARABOLIC, z0, 1.0 + 0j)


def _vector_reciprocal(triplet: HerglotzTriplet):
    G = G_function(triplet)
    if triplet.mu.ac_parts:
        def inv(w):
            g = np.array([G(complex(x)) for x in np.ravel(w)], dtype=complex)
            return 1.0 / g
    else:
        def inv(w):
            return 1.0 / G(np.asarray(w, dtype=complex))
    return inv


def _split_points(a: complex, b: complex) -> list[float]:
    """Interior breakpoints in [0, 1] placed geometrically away from the point nearest 0."""
    length = abs(b - a)
    near = max(min(abs(a), abs(b)), min(a.imag, b.imag), 1e-3)
    if length <= near:
        return []
    pts, d = [], near
    while d < length:
        pts.append(d / length)
        d *= 2.0
    return pts if abs(a) <= abs(b) else [1.0 - p for p in reversed(pts)]


def segment_integral(inv_G, a: complex, b: complex, *, rtol: float = PATH_RTOL) -> complex:
    """``int_a^b dw / G(w)`` along the straight segment."""
    if a == b:
        return 0j
    if not (a.imag > 0 and b.imag > 0):
        raise KoenigsError(f"path segment {a} -> {b} leaves the upper half-plane")
    d = b - a

    def f(tau):
        vals = inv_G(a + d * tau)
        if not np.all(np.isfinite(vals)) or np.any(np.abs(vals) > 1.0 / G_FLOOR):
            raise KoenigsError(f"G (nearly) vanishes on the segment {a} -> {b}")
        return vals * d

    return adaptive_gk(f, 0.0, 1.0, points=_split_points(a, b), rtol=rtol, atol=1e-300).value


def default_path(z0: complex, z: complex) -> list[complex]:
    """Up from ``z0``, across at the higher level, down to ``z``."""
    top = max(z0.imag, z.imag)
    pts = [z0, complex(z0.real, top), complex(z.real, top), z]
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def path_integral(triplet: HerglotzTriplet, path, *, rtol: float = PATH_RTOL, inv_G=None) -> complex:
    inv_G = inv_G or _vector_reciprocal(triplet)
    pts = [complex(p) for p in path]
    return sum((segment_integral(inv_G, a, b, rtol=rtol) for a, b in zip(pts, pts[1:])), 0j)


def _check_z(z) -> complex:
    z = complex(z)
    if not z.imag > 0 or not cmath.isfinite(z):
        raise ValueError(f"z must lie in the upper half-plane, got {z}")
    return z


def koenigs_parabolic(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex, *, path=None,
                      rtol: float = PATH_RTOL) -> complex:
    """``h(z) = anchor + int_{z0 -> z} dw/G(w)``."""
    if chart.kind != PARABOLIC:
        raise ValueError("chart is not parabolic")
    z = _check_z(z)
    path = path or default_path(chart.z0, z)
    return chart.anchor + path_integral(triplet, path, rtol=rtol)


def koenigs_hyperbolic(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex, *, path=None,
                       rtol: float = PATH_RTOL) -> complex:
    """``h(z) = anchor * exp(lam * int_{z0 -> z} dw/G(w))``."""
    if chart.kind != HYPERBOLIC:
        raise ValueError("chart is not hyperbolic")
    z = _check_z(z)
    path = path or default_path(chart.z0, z)
    return chart.anchor * cmath.exp(chart.lam * path_integral(triplet, path, rtol=rtol))


def koenigs(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex, **kw) -> complex:
    if chart.kind == PARABOLIC:
        return koenigs_parabolic(triplet, chart, z, **kw)
    return koenigs_hyperbolic(triplet, chart, z, **kw)


def abel_residual(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex, t: float) -> float:
    """``|h(phi_t(z)) - h(z) - t| / (1 + t)``."""
    w = flow_map(triplet, z, t)
    return abs(koenigs_parabolic(triplet, chart, w) - koenigs_parabolic(triplet, chart, z) - t) / (1.0 + t)


def schroeder_residual(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex, t: float) -> float:
    """``|h(phi_t(z)) - e^{lam t} h(z)| / (1 + |e^{lam t} h(z)|)``."""
    w = flow_map(triplet, z, t)
    target = math.exp(chart.lam * t) * koenigs_hyperbolic(triplet, chart, z)
    return abs(koenigs_hyperbolic(triplet, chart, w) - target) / (1.0 + abs(target))


def derivative_identity_error(triplet: HerglotzTriplet, chart: KoenigsChart, z: complex,
                              delta: float | None = None) -> float:
    """Relative defect of ``h' G = 1`` (or ``lam h``) with ``h'`` from a five-point stencil."""
    z = _check_z(z)
    if delta is None:
        delta = 1e-2 * min(z.imag, 1.0 + abs(z))
    # All stencil points share a path prefix to z so only short legs differ.
    hz = koenigs(triplet, chart, z)
    inv_G = _vector_reciprocal(triplet)

    def h_near(dz):
        leg = path_integral(triplet, [z, z + dz], inv_G=inv_G)
        if chart.kind == PARABOLIC:
            return hz + leg
        return hz * cmath.exp(chart.lam * leg)

    hp = (-h_near(2 * delta) + 8 * h_near(delta) - 8 * h_near(-delta) + h_near(-2 * delta)) / (12 * delta)
    G = G_function(triplet)(z)
    target = 1.0 if chart.kind == PARABOLIC else chart.lam * hz
    return abs(hp * G - target) / abs(target)


def angular_ratio_limit(sampler, grid=None, *, rtol: float = RAY_RTOL) -> LimitEstimate:
    """Estimate ``lim f(iy)/(iy)`` from ``sampler(y) = f(iy)`` on a geometric grid."""
    ys = geometric_ray() if grid is None else np.asarray(grid, dtype=float)
    ratios = [sampler(y) / (1j * y) for y in ys]
    return ray_limit(ratios, ys, rtol=rtol, atol=rtol * 1e-3)


def koenigs_on_ray(triplet: HerglotzTriplet, chart: KoenigsChart, ys) -> np.ndarray:
    """``h(iy)`` on an increasing grid, accumulated segment by segment from ``z0``."""
    inv_G = _vector_reciprocal(triplet)
    ys = np.asarray(ys, dtype=float)
    acc = path_integral(triplet, default_path(chart.z0, 1j * ys[0]), inv_G=inv_G)
    out = [acc]
    for a, b in zip(ys, ys[1:]):
        acc += segment_integral(inv_G, 1j * a, 1j * b)
        out.append(acc)
    integrals = np.array(out, dtype=complex)
    if chart.kind == PARABOLIC:
        return chart.anchor + integrals
    return chart.anchor * np.exp(chart.lam * integrals)


@dataclass(frozen=True)
class SqrtConformality:
    verdict: str
    limit: LimitEstimate  # L' = lim h~(iy)/(iy) with h~ = i sqrt(h)
    predicted_rate: complex | None  # i / L'
    literal_rate: complex | None  # i * (lim sqrt(h(iy))/(iy))^{-1}
    chart_ok: bool
    slit_hits: int
    notes: tuple = ()

    def to_json(self) -> dict:
        def pair(c):
            return None if c is None else [c.real, c.imag]

        return {
            "verdict": self.verdict,
            "limit": self.limit.to_json(),
            "predicted_rate": pair(self.predicted_rate),
            "literal_rate": pair(self.literal_rate),
            "chart_ok": self.chart_ok,
            "slit_hits": self.slit_hits,
            "notes": list(self.notes),
        }


def sqrt_conformality(triplet: HerglotzTriplet, chart: KoenigsChart | None = None, *, grid=None,
                      rtol: float = RAY_RTOL) -> SqrtConformality:
    """Test whether ``sqrt(h)`` is conformal at infinity, using ``h~ = i sqrt(h)``.

    ``h`` is sampled along the imaginary axis; samples on ``(-inf, 0]`` make
    the chart invalid and the verdict undetermined.  The predicted limit of
    ``phi_t/sqrt(t)`` is ``i/L'``.  The value of the literal formula
    ``i (lim sqrt(h(iy))/(iy))^{-1}`` is reported alongside; it differs from
    ``i/L'`` by the unimodular factor ``i``.
    """
    if triplet.alpha > 0:
        raise ValueError("the square-root test applies to parabolic generators only")
    chart = chart or make_chart(triplet)
    ys = geometric_ray() if grid is None else np.asarray(grid, dtype=float)
    h = koenigs_on_ray(triplet, chart, ys)
    on_slit = (np.abs(h.imag) <= 1e-14 * np.abs(h)) & (h.real <= 0)
    hits = int(np.count_nonzero(on_slit))
    if hits:
        lim = LimitEstimate(0j, False, math.inf, (), "undetermined")
        note = f"{hits} sampled Koenigs values lie on (-inf, 0]; square-root chart invalid"
        return SqrtConformality(UNKNOWN, lim, None, None, False, hits, (note,))
    root = np.sqrt(h)
    lim = ray_limit(1j * root / (1j * ys), ys, rtol=rtol, atol=rtol * 1e-3)
    if lim.status == CONVERGED and abs(lim.value) > lim.error_indicator:
        L = lim.value
        return SqrtConformality(YES, lim, 1j / L, 1j / (L / 1j), True, 0)
    if lim.status in (ZERO, DIVERGES):
        return SqrtConformality(NO, lim, None, None, True, 0)
    return SqrtConformality(UNKNOWN, lim, None, None, True, 0)


def chart_dump(triplet: HerglotzTriplet, chart: KoenigsChart, path, *, grid=None) -> None:
    """Write the chart and its sampled slit diagnostics as JSON."""
    ys = geometric_ray() if grid is None else np.asarray(grid, dtype=float)
    h = koenigs_on_ray(triplet, chart, ys)
    data = {
        **chart.to_json(),
        "samples": [[float(y), v.real, v.imag] for y, v in zip(ys, h)],
        "min_distance_to_slit": float(np.min(np.where(h.real > 0, np.abs(h), np.abs(h.imag)))),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=2)
        fh.write("\n")
