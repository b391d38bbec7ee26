"""Semigroups of holomorphic self-maps of the upper half-plane: orbits,
Koenigs functions and the extremal escape rate."""

from .flow import Orbit, Schedule, closed_form_orbit, family_triplet, flow_map, integrate_orbit
from .generator import HerglotzTriplet, eval_G
from .limits import LimitEstimate
from .measure import Measure
from .rates import classify, cross_validate, rate_estimate

__all__ = [
    "HerglotzTriplet", "Measure", "eval_G", "LimitEstimate", "Orbit", "Schedule", "integrate_orbit",
    "closed_form_orbit", "family_triplet", "flow_map", "classify", "cross_validate", "rate_estimate",
]

__version__ = "0.1.0"
