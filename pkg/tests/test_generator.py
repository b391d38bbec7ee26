import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CAUCHY, CONSTANT_1, GAUSSIAN, HYPERBOLIC_MIX, MIXED, TWO_ATOM, UNIFORM, inverse
from oracles import G_exact
from semigroup_lab.generator import (
    HerglotzTriplet,
    classify_algebraic,
    coefficients_check,
    eval_G,
    extremal_zero_hs_test,
    second_moment_mass,
    zG_angular_limit,
)
from semigroup_lab.limits import NO, UNKNOWN, YES
from semigroup_lab.measure import Measure

ALL = [inverse(0.7), TWO_ATOM, CAUCHY, CONSTANT_1, GAUSSIAN, UNIFORM, MIXED, HYPERBOLIC_MIX,
       HerglotzTriplet(2.0, 0.0, Measure())]
POINTS = [1j, 0.3 + 2j, -5 + 0.01j, 40 + 3j, 1e6j, -2e3 + 7e4j]


@pytest.mark.parametrize("z", POINTS)
def test_eval_G_closed_forms(z):
    m = 0.7
    assert eval_G(inverse(m), z) == pytest.approx(-m / z, rel=1e-14)
    assert eval_G(HerglotzTriplet(1.5, 0, Measure()), z) == pytest.approx(1.5 * z, rel=1e-15)
    assert eval_G(TWO_ATOM, z) == pytest.approx(2 * z / (1 - z * z), rel=1e-12)
    assert eval_G(CAUCHY, z) == pytest.approx(1j, abs=1e-12)


@pytest.mark.parametrize("triplet", [GAUSSIAN, UNIFORM, MIXED, HYPERBOLIC_MIX])
@pytest.mark.parametrize("z", POINTS)
def test_eval_G_against_independent_transforms(triplet, z):
    exact = G_exact(triplet, z)
    assert abs(eval_G(triplet, z) - exact) <= 1e-9 * max(1.0, abs(exact))


def test_eval_G_rejects_boundary():
    for z in (1.0, 2 - 1j, complex(math.nan, 1)):
        with pytest.raises(ValueError):
            eval_G(TWO_ATOM, z)


@pytest.mark.parametrize("triplet", ALL)
def test_generator_range(triplet):
    rng = np.random.default_rng(7)
    for _ in range(25):
        z = complex(rng.normal(0, 5), 10 ** rng.uniform(-2, 3))
        assert eval_G(triplet, z).imag >= -1e-12


@pytest.mark.parametrize("triplet", ALL)
def test_coefficients_recovered(triplet):
    chk = coefficients_check(triplet)
    assert chk.ok
    assert abs(chk.alpha.value - triplet.alpha) <= 1e-6 * max(1, triplet.alpha)
    assert chk.beta == pytest.approx(triplet.beta, abs=1e-6)


def test_coefficients_examples():
    assert coefficients_check(TWO_ATOM).beta == pytest.approx(0, abs=1e-15)
    assert coefficients_check(HerglotzTriplet(0, 0.4, Measure.atom(0, 2))).beta == pytest.approx(0.4)


def test_classify_algebraic():
    r = classify_algebraic(HerglotzTriplet(2.0, 0, Measure()))
    assert r.kind == "hyperbolic" and r.spectral_value == 2.0
    r = classify_algebraic(CONSTANT_1)
    assert r.kind == "parabolic" and r.step == "positive"
    r = classify_algebraic(inverse(1.0))
    assert r.kind == "parabolic" and r.step == UNKNOWN
    assert classify_algebraic(HerglotzTriplet()).kind == "trivial"


def test_extremal_moment_examples():
    for m in (0.5, 1.0, 2.0):
        verdict, c = extremal_zero_hs_test(inverse(m))
        assert verdict == YES and c == pytest.approx(1j * math.sqrt(2 * m))
    assert extremal_zero_hs_test(TWO_ATOM) == (YES, pytest.approx(2j))
    assert extremal_zero_hs_test(CAUCHY)[0] == NO
    assert extremal_zero_hs_test(CONSTANT_1)[0] == NO
    # beta off the first moment by more than the tolerance
    assert extremal_zero_hs_test(HerglotzTriplet(0, 1e-6, Measure.atom(0, 1)))[0] == NO
    with pytest.raises(ValueError):
        extremal_zero_hs_test(HerglotzTriplet(1.0, 0, Measure()))
    with pytest.raises(ValueError):
        extremal_zero_hs_test(HerglotzTriplet())


def test_zG_examples():
    z = zG_angular_limit(TWO_ATOM)
    assert z.verdict == YES and z.limit.value == pytest.approx(-2, abs=1e-6) and z.rate == pytest.approx(2)
    for m in (0.5, 2.0):
        z = zG_angular_limit(inverse(m))
        assert z.limit.value == pytest.approx(-m, abs=1e-12) and z.rate == pytest.approx(math.sqrt(2 * m))
    assert zG_angular_limit(CONSTANT_1).verdict == NO
    assert zG_angular_limit(CAUCHY).verdict == NO


@pytest.mark.parametrize("triplet", [inverse(0.3), TWO_ATOM, GAUSSIAN, MIXED, CAUCHY, CONSTANT_1, UNIFORM])
def test_moment_and_zG_criteria_agree(triplet):
    verdict, predicted = extremal_zero_hs_test(triplet)
    zg = zG_angular_limit(triplet)
    assert zg.verdict == verdict
    if verdict == YES:
        assert -2 * zg.limit.value.real == pytest.approx(2 * second_moment_mass(triplet.mu), rel=1e-6)
        assert zg.rate_constant == pytest.approx(predicted, rel=1e-6)


@settings(max_examples=30, deadline=None, derandomize=True)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.05, 3)), min_size=1, max_size=4),
       st.floats(-1, 1), st.booleans())
def test_atomic_criteria_agree(atoms, shift, balanced):
    mu = Measure(tuple(atoms))
    beta = sum(s * w for s, w in atoms) + (0.0 if balanced else shift + math.copysign(0.1, shift))
    t = HerglotzTriplet(0.0, beta, mu)
    verdict, _ = extremal_zero_hs_test(t)
    assert verdict == (YES if balanced else NO)
    assert zG_angular_limit(t).verdict == verdict


def test_triplet_json_round_trip():
    assert HerglotzTriplet.from_json(MIXED.to_json()) == MIXED


def test_triplet_validation():
    with pytest.raises(ValueError):
        HerglotzTriplet(-1.0, 0, Measure())
    with pytest.raises(ValueError):
        HerglotzTriplet(0, math.inf, Measure())
    assert HerglotzTriplet().trivial and not CONSTANT_1.trivial
