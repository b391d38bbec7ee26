import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CONSTANT_1, GAUSSIAN, MIXED, TWO_ATOM, inverse, long_orbit
from semigroup_lab.flow import Schedule, family_triplet, flow_map, integrate_orbit
from semigroup_lab.hypgeom import HYPERBOLIC, PHS, ZERO_HS, dist_H, dist_K, normalizer, total_speed_deviation

upper = st.builds(complex, st.floats(-50, 50), st.floats(1e-3, 50))
slit_plane = st.builds(complex, st.floats(-50, 50), st.floats(-50, 50)).filter(
    lambda a: not (abs(a.imag) < 1e-6 and a.real <= 1e-6))


def test_dist_H_examples():
    assert dist_H(1j, 1j) == 0
    assert dist_H(1j, 1j * math.e**2) == pytest.approx(1, rel=1e-15)
    assert dist_H(1j, 1 + 1j) == pytest.approx(0.5 * math.log((math.sqrt(5) + 1) / (math.sqrt(5) - 1)), rel=1e-15)


def test_dist_H_far_points_keep_precision():
    # d(i, i y) = 1/2 log y exactly
    for y in (1e4, 1e8, 1e12):
        assert dist_H(1j, 1j * y) == pytest.approx(0.5 * math.log(y), rel=1e-15)


def test_dist_H_rejects_boundary():
    with pytest.raises(ValueError):
        dist_H(1j, 2.0)


def test_dist_K_examples():
    assert dist_K(3.0, 3.0) == 0
    assert dist_K(1.0, math.e**4) == pytest.approx(1, rel=1e-14)
    for bad in (-1.0, 0.0):
        with pytest.raises(ValueError):
            dist_K(bad, 1.0)


@settings(max_examples=100, derandomize=True)
@given(upper, upper)
def test_dist_H_metric_axioms(z, w):
    d = dist_H(z, w)
    assert d >= 0 and d == pytest.approx(dist_H(w, z), rel=1e-12, abs=1e-15)


@settings(max_examples=100, derandomize=True)
@given(slit_plane, slit_plane, st.floats(0.01, 100))
def test_dist_K_homothety(a, b, c):
    assert dist_K(c * a, c * b) == pytest.approx(dist_K(a, b), rel=1e-9, abs=1e-12)


@settings(max_examples=100, derandomize=True)
@given(slit_plane, slit_plane, st.floats(0.1, 10), st.floats(-5, 5))
def test_dist_K_chart_composed_with_moebius(a, b, scale, shift):
    # z -> scale*z + shift is a Moebius self-map of the half-plane
    za, zb = 1j * np.sqrt(complex(a)), 1j * np.sqrt(complex(b))
    moved = dist_H(scale * za + shift, scale * zb + shift)
    assert moved == pytest.approx(dist_K(a, b), rel=1e-10, abs=1e-12)
    inverted = dist_H(-1 / za, -1 / zb)
    assert inverted == pytest.approx(dist_K(a, b), rel=1e-10, abs=1e-12)


@settings(max_examples=100, derandomize=True)
@given(st.floats(0.1, 5), st.builds(complex, st.floats(-5, 5), st.floats(0, 5)),
       st.builds(complex, st.floats(-5, 5), st.floats(0, 5)))
def test_domain_monotonicity(R, dz, dw):
    z, w = dz + 1j * (R + 1e-3), dw + 1j * (R + 1e-3)
    # U = {Im > R} with chart z -> z - iR onto the half-plane
    assert dist_H(z, w) <= dist_H(z - 1j * R, w - 1j * R) + 1e-12


@pytest.mark.parametrize("triplet", [TWO_ATOM, GAUSSIAN, MIXED, CONSTANT_1, inverse(0.8)])
def test_schwarz_pick(triplet):
    rng = np.random.default_rng(11)
    for _ in range(6):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.1, 3))
        w = complex(rng.uniform(-3, 3), rng.uniform(0.1, 3))
        t = rng.uniform(0, 100)
        assert dist_H(flow_map(triplet, z, t), flow_map(triplet, w, t)) <= dist_H(z, w) + 1e-9


def test_normalizers():
    t = np.array([math.e, math.e**2])
    assert np.allclose(normalizer(ZERO_HS, t), [0.25, 0.5])
    assert np.allclose(normalizer(PHS, t), [1, 2])
    assert np.allclose(normalizer(HYPERBOLIC, np.array([2.0]), lam=3.0), [3.0])
    with pytest.raises(ValueError):
        normalizer(HYPERBOLIC, t)


def test_speed_examples():
    s = total_speed_deviation(long_orbit("inverse_half"))
    assert s.verdict == "converges" and abs(s.limit.value.real) <= 1e-2
    assert s.rate_check <= 1e-2
    s = total_speed_deviation(long_orbit("two_atom"))
    assert s.verdict == "converges" and s.limit.value.real == pytest.approx(0.5 * math.log(2), abs=1e-2)
    s = total_speed_deviation(long_orbit("cauchy", t_max=1e10))
    assert s.verdict == "diverges" and s.deviation[-1] > 5


def test_speed_short_orbit_undetermined():
    s = total_speed_deviation(integrate_orbit(TWO_ATOM, 1j, t_max=1e3))
    assert s.verdict == "undetermined"


def test_speed_hyperbolic_mode():
    o = integrate_orbit(family_triplet("linear", {"lam": 1.0}), 1j, Schedule.uniform(30, 30))
    s = total_speed_deviation(o, HYPERBOLIC, lam=1.0)
    assert s.verdict == "converges" and abs(s.limit.value.real) < 1e-6


def test_speed_csv(tmp_path):
    s = total_speed_deviation(long_orbit("two_atom"))
    s.to_csv(tmp_path / "speed.csv")
    lines = (tmp_path / "speed.csv").read_text().splitlines()
    assert lines[0] == "t,deviation" and len(lines) == len(s.t) + 1
