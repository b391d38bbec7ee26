import json
import sys
from functools import lru_cache
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from semigroup_lab.flow import Schedule, family_triplet, integrate_orbit  # noqa: E402
from semigroup_lab.generator import HerglotzTriplet  # noqa: E402
from semigroup_lab.measure import Measure  # noqa: E402


def inverse(m):
    return family_triplet("inverse", {"m": m})


TWO_ATOM = family_triplet("two_atom", {})
CAUCHY = HerglotzTriplet(0.0, 0.0, Measure.cauchy(0.0, 1.0))
CONSTANT_1 = family_triplet("constant", {"c": 1.0})
GAUSSIAN = HerglotzTriplet(0.0, 1.0, Measure.gaussian(1.0, 0.5))
UNIFORM = HerglotzTriplet(0.0, 0.5, Measure.uniform(-1.0, 2.0, 1.5))
MIXED = HerglotzTriplet(0.0, 0.3, Measure(((0.5, 0.2), (-2.0, 0.1)), Measure.gaussian(0.0, 1.0, 0.5).ac_parts))
HYPERBOLIC_MIX = HerglotzTriplet(0.5, -0.2, Measure.atom(1.0, 0.3) + Measure.cauchy(2.0, 0.5, 0.4))

# parabolic, zero hyperbolic step: the five triplets of the conformality suite
ZERO_STEP = {
    "inverse_half": inverse(0.5),
    "inverse_1": inverse(1.0),
    "inverse_2": inverse(2.0),
    "two_atom": TWO_ATOM,
    "cauchy": CAUCHY,
}


def bundled(name):
    text = resources.files("semigroup_lab").joinpath("scenarios", name + ".json").read_text()
    return json.loads(text)


def seed_for(name):
    return bundled(name)["seeds"]["properties"]


@lru_cache(maxsize=None)
def long_orbit(key, z0=1j, t_max=1e8):
    """Cached long-horizon orbits of the named triplets."""
    triplet = {**ZERO_STEP, "constant_1": CONSTANT_1, "gaussian": GAUSSIAN}[key]
    return integrate_orbit(triplet, z0, Schedule.geometric(t_max))


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and fail the test on a miss."""

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        ACCEPTANCE_LINES[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
