import json
import math

import numpy as np
import pytest

from conftest import CAUCHY, CONSTANT_1, GAUSSIAN, HYPERBOLIC_MIX, MIXED, TWO_ATOM, ZERO_STEP, inverse
from oracles import h_constant, h_inverse, h_two_atom
from semigroup_lab.flow import family_triplet
from semigroup_lab.generator import HerglotzTriplet, extremal_zero_hs_test, second_moment_mass
from semigroup_lab.koenigs import (
    HYPERBOLIC,
    PARABOLIC,
    abel_residual,
    angular_ratio_limit,
    chart_dump,
    derivative_identity_error,
    koenigs_hyperbolic,
    koenigs_parabolic,
    make_chart,
    schroeder_residual,
    sqrt_conformality,
)
from semigroup_lab.limits import NO, YES

LINEAR_1 = family_triplet("linear", {"lam": 1.0})
POINTS = [1j, 0.3 + 2j, -4 + 0.05j, 25 + 1j, 3e3j]


@pytest.mark.parametrize("z", POINTS)
def test_parabolic_closed_forms(z):
    for m in (0.5, 2.0):
        t = inverse(m)
        assert koenigs_parabolic(t, make_chart(t), z) == pytest.approx(h_inverse(m, z), rel=1e-11)
    assert koenigs_parabolic(TWO_ATOM, make_chart(TWO_ATOM), z) == pytest.approx(h_two_atom(z), rel=1e-11)
    assert koenigs_parabolic(CONSTANT_1, make_chart(CONSTANT_1), z) == pytest.approx(h_constant(1.0, z), rel=1e-12)


def test_negative_control_koenigs_is_minus_iz():
    for z in POINTS[:4]:
        assert koenigs_parabolic(CAUCHY, make_chart(CAUCHY), z) == pytest.approx(-1j * z, rel=1e-10)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_hyperbolic_linear_closed_form(lam):
    t = family_triplet("linear", {"lam": lam})
    chart = make_chart(t, 1j)
    assert chart.kind == HYPERBOLIC
    for z in POINTS:
        assert koenigs_hyperbolic(t, chart, z) == pytest.approx(1j * z / 1j, rel=1e-11)


def test_chart_anchor():
    for t in (TWO_ATOM, GAUSSIAN, LINEAR_1):
        chart = make_chart(t, 0.5 + 2j)
        h = koenigs_parabolic(t, chart, 0.5 + 2j) if chart.kind == PARABOLIC else koenigs_hyperbolic(t, chart, 0.5 + 2j)
        assert h == chart.anchor


@pytest.mark.parametrize("triplet", [TWO_ATOM, GAUSSIAN, MIXED, CAUCHY, inverse(0.3)])
def test_path_independence(triplet):
    chart = make_chart(triplet)
    for z in (2 + 0.5j, -3 + 4j):
        default = koenigs_parabolic(triplet, chart, z)
        straight = koenigs_parabolic(triplet, chart, z, path=[chart.z0, z])
        detour = koenigs_parabolic(triplet, chart, z, path=[chart.z0, -5 + 0.2j, 6 + 9j, z])
        assert abs(straight - default) <= 1e-9 * abs(default)
        assert abs(detour - default) <= 1e-9 * abs(default)


@pytest.mark.parametrize("triplet", [TWO_ATOM, GAUSSIAN, MIXED, CAUCHY, CONSTANT_1, LINEAR_1, HYPERBOLIC_MIX])
def test_derivative_identity(triplet):
    rng = np.random.default_rng(5)
    chart = make_chart(triplet)
    for _ in range(4):
        z = complex(rng.uniform(-3, 3), rng.uniform(0.2, 4))
        assert derivative_identity_error(triplet, chart, z) <= 1e-6


def test_abel_examples():
    for t in (inverse(0.5), TWO_ATOM):
        assert abel_residual(t, make_chart(t), 1j, 0.0) == 0.0
    assert abel_residual(inverse(0.5), make_chart(inverse(0.5)), 1j, 10.0) <= 1e-8
    assert abel_residual(TWO_ATOM, make_chart(TWO_ATOM), 1j, 10.0) <= 1e-7


@pytest.mark.parametrize("triplet", [inverse(0.5), inverse(2.0), TWO_ATOM, CONSTANT_1, GAUSSIAN])
def test_abel_residual_over_time(triplet):
    chart = make_chart(triplet)
    for t in (1.0, 7.5, 33.0, 100.0):
        assert abel_residual(triplet, chart, 0.4 + 1.5j, t) <= 1e-7


def test_schroeder_examples():
    chart = make_chart(LINEAR_1)
    assert schroeder_residual(LINEAR_1, chart, 2j, 0.0) == 0.0
    assert schroeder_residual(LINEAR_1, chart, 2j, 1.0) <= 1e-8
    chart = make_chart(HYPERBOLIC_MIX)
    assert schroeder_residual(HYPERBOLIC_MIX, chart, 0.5 + 1j, 3.0) <= 1e-7


def test_angular_ratio_examples():
    assert angular_ratio_limit(lambda y: 1j * y).value == pytest.approx(1)
    lim = angular_ratio_limit(lambda y: koenigs_hyperbolic(LINEAR_1, make_chart(LINEAR_1, 2j), 1j * y))
    assert lim.nonzero and lim.value == pytest.approx(0.5, rel=1e-9)
    lim = angular_ratio_limit(lambda y: -(1j * y) ** 2)
    assert lim.infinite and not lim.nonzero


@pytest.mark.parametrize("name", sorted(ZERO_STEP))
def test_sqrt_conformality_matches_moments(name):
    triplet = ZERO_STEP[name]
    res = sqrt_conformality(triplet)
    verdict, predicted = extremal_zero_hs_test(triplet)
    assert res.verdict == verdict and res.chart_ok
    if verdict == YES:
        expected = 1j * math.sqrt(2 * second_moment_mass(triplet.mu))
        assert abs(res.predicted_rate - expected) <= 1e-4 * abs(expected)
        # the literal formula differs by the unimodular factor i
        assert res.literal_rate == pytest.approx(1j * res.predicted_rate, rel=1e-12)


def test_sqrt_conformality_inverse_limit():
    for m in (0.5, 1.0, 2.0):
        res = sqrt_conformality(inverse(m))
        assert res.limit.value == pytest.approx(1 / math.sqrt(2 * m), rel=1e-6)
        assert res.literal_rate == pytest.approx(-math.sqrt(2 * m), rel=1e-6)


def test_sqrt_conformality_negative_control():
    res = sqrt_conformality(CAUCHY)
    assert res.verdict == NO and res.predicted_rate is None


def test_sqrt_conformality_detects_slit():
    # with the anchor moved, h takes values on the negative axis along the ray
    t = inverse(1.0)
    chart = make_chart(t)
    moved = chart.__class__(chart.kind, chart.z0, -1e3 + 0j)
    res = sqrt_conformality(t, moved)
    assert not res.chart_ok and res.slit_hits > 0 and res.verdict == "undetermined"


def test_koenigs_rejections():
    with pytest.raises(ValueError):
        make_chart(HerglotzTriplet())
    with pytest.raises(ValueError):
        koenigs_parabolic(LINEAR_1, make_chart(LINEAR_1), 1j)
    with pytest.raises(ValueError):
        sqrt_conformality(LINEAR_1)


def test_chart_dump(tmp_path):
    chart_dump(TWO_ATOM, make_chart(TWO_ATOM), tmp_path / "chart.json")
    data = json.loads((tmp_path / "chart.json").read_text())
    assert data["kind"] == "parabolic" and data["anchor"] == [1.0, 0.0]
    assert data["min_distance_to_slit"] > 0
