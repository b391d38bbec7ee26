"""Command-line front end: run scenario files and write reports.

    semigroup-lab run inverse_half --out results
    semigroup-lab run my_scenario.json --horizon 1e6 --format json
    semigroup-lab list

Outputs go to ``<out>/<scenario name>/``.  Values set in the scenario file
take precedence over the command-line flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from json.decoder import scanstring
from pathlib import Path

import jsonschema
import numpy as np

from .flow import (
    CLOSED_FORM_FAMILIES,
    Orbit,
    Schedule,
    closed_form_orbit,
    family_triplet,
    hyperbolic_step_estimate,
    integrate_orbit,
)
from .generator import HerglotzTriplet, classify_algebraic
from .hypgeom import HYPERBOLIC, PHS, ZERO_HS, total_speed_deviation
from .koenigs import (
    PARABOLIC,
    abel_residual,
    chart_dump,
    derivative_identity_error,
    make_chart,
    schroeder_residual,
    sqrt_conformality,
)
from .operators import BERGMAN, HARDY, conjugate_orbit, disc_rates, norm_growth_check, product_check
from .rates import EXP_LAMBDA, LINEAR_T, SQRT_T, classify, cross_validate, rate_estimate, slope

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DISAGREE = 2

ANALYSES = ("classify", "rate", "koenigs", "speed", "operators", "cross_validate")
DEFAULT_HORIZON = 1e8
DEFAULT_TOL = 1e-10
ORACLE_HORIZON = 100.0
HYPERBOLIC_POINTS = 1000

_num = {"type": "number"}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema", "name", "start_points"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "family": {
            "type": "object",
            "required": ["name"],
            "additionalProperties": False,
            "properties": {
                "name": {"enum": list(CLOSED_FORM_FAMILIES)},
                "params": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"lam": _num, "m": _num, "c": {"oneOf": [_num, _point]}},
                },
            },
        },
        "triplet": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "minimum": 0},
                "beta": _num,
                "mu": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "atoms": {"type": "array", "items": _point},
                        "ac": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["family", "params", "weight"],
                                "additionalProperties": False,
                                "properties": {
                                    "family": {"enum": ["cauchy", "gaussian", "uniform"]},
                                    "params": _point,
                                    "weight": {"type": "number", "exclusiveMinimum": 0},
                                },
                            },
                        },
                    },
                },
            },
        },
        "start_points": {"type": "array", "minItems": 1, "items": _point},
        "t_max": {"type": "number", "minimum": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "integrator_rtol": {"type": "number", "exclusiveMinimum": 0},
                "rate_rtol": {"type": "number", "exclusiveMinimum": 0},
                "step_threshold": {"type": "number", "exclusiveMinimum": 0},
                "step_horizon": {"type": "number", "exclusiveMinimum": 0},
                "shift_rtol": {"type": "number", "exclusiveMinimum": 0},
                "shift_growth": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "analyses": {"type": "array", "uniqueItems": True, "items": {"enum": list(ANALYSES)}},
        "operators": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": _point,
                "p": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 1}},
            },
        },
        "format": {"enum": ["csv", "json"]},
        "seeds": {"type": "object", "additionalProperties": {"type": "integer"}},
    },
    "oneOf": [{"required": ["family"]}, {"required": ["triplet"]}],
}


class ScenarioError(ValueError):
    pass


def _positions(text: str) -> dict:
    """Map JSON paths (tuples of keys and indices) to character offsets."""
    decoder = json.JSONDecoder()
    out = {}

    def skip(i):
        while i < len(text) and text[i] in " \t\r\n":
            i += 1
        return i

    def value(i, path):
        i = skip(i)
        out[path] = i
        if text[i] == "{":
            i = skip(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key, i = scanstring(text, skip(i) + 1)
                i = skip(i) + 1  # colon
                i = skip(value(i, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1
        if text[i] == "[":
            i = skip(i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = skip(value(i, path + (k,)))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        return decoder.raw_decode(text, i)[1]

    value(0, ())
    return out


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def parse_scenario(text: str, source: str = "<scenario>") -> dict:
    """Parse and validate scenario JSON; errors name the field path and line/column."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        pos = _positions(text)
        lines = []
        for err in errors:
            path = tuple(err.absolute_path)
            line, col = _line_col(text, pos.get(path, 0))
            where = "/".join(map(str, path)) or "(root)"
            lines.append(f"{source}:{line}:{col}: {where}: {err.message}")
        raise ScenarioError("\n".join(lines))
    for p in data["start_points"]:
        if not p[1] > 0:
            raise ScenarioError(f"{source}: start point {p} is not in the upper half-plane")
    return data


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath("scenarios").iterdir()
                  if p.name.endswith(".json"))


def load_scenario(ref: str) -> dict:
    """Load a scenario from a path or by bundled name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(), str(path))
    if ref in bundled_names():
        res = resources.files(__package__).joinpath("scenarios", ref + ".json")
        return parse_scenario(res.read_text(), f"<bundled {ref}>")
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def scenario_triplet(sc: dict) -> HerglotzTriplet:
    if "family" in sc:
        params = dict(sc["family"].get("params", {}))
        if isinstance(params.get("c"), list):
            params["c"] = complex(*params["c"])
        return family_triplet(sc["family"]["name"], params)
    return HerglotzTriplet.from_json(sc["triplet"])


@dataclass
class RunConfig:
    out: Path
    tol: float = DEFAULT_TOL
    horizon: float = DEFAULT_HORIZON
    fmt: str = "csv"


@dataclass
class RunResult:
    name: str
    exit_code: int
    files: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def _clean(obj):
    """JSON-safe copy: complex as [re, im], non-finite floats as null, numpy scalars unwrapped."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Writer:
    def __init__(self, directory: Path, fmt: str):
        self.dir = directory
        self.fmt = fmt
        self.files = []

    def json(self, name: str, data) -> None:
        path = self.dir / name
        with open(path, "w") as fh:
            json.dump(_clean(data), fh, sort_keys=True, indent=2, allow_nan=False)
            fh.write("\n")
        self.files.append(path.name)

    def series(self, name: str, header: list, rows) -> None:
        rows = [list(r) for r in rows]
        if self.fmt == "json":
            self.json(name + ".json", {"columns": header, "rows": rows})
            return
        path = self.dir / (name + ".csv")
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(repr(float(x)) for x in r) + "\n")
        self.files.append(path.name)


def _orbit_rows(orbit: Orbit):
    for t, v in zip(orbit.times, orbit.values):
        yield [t, v.real, v.imag, abs(v), math.atan2(v.imag, v.real)]


def run_scenario(sc: dict, cfg: RunConfig) -> RunResult:
    """Run every requested analysis of one validated scenario."""
    name = sc["name"]
    result = RunResult(name, EXIT_OK)
    analyses = sc.get("analyses", list(ANALYSES))
    if not analyses:
        result.messages.append("no analyses requested")
        return result
    try:
        triplet = scenario_triplet(sc)
        if triplet.trivial:
            raise ValueError("G is identically zero; the identity semigroup has no orbits to analyse")
    except (ValueError, KeyError) as exc:
        result.exit_code = EXIT_INPUT
        result.messages.append(f"{name}: {exc}")
        return result
    tol = sc.get("tolerances", {})
    rtol = tol.get("integrator_rtol", cfg.tol)
    rate_rtol = tol.get("rate_rtol", 1e-3)
    step_kw = {k: tol[f"step_{k}"] for k in ("threshold", "horizon") if f"step_{k}" in tol}
    shift_kw = {k: tol[f"shift_{k}"] for k in ("rtol", "growth") if f"shift_{k}" in tol}
    t_max = float(sc.get("t_max", cfg.horizon))
    writer = _Writer(cfg.out / name, sc.get("format", cfg.fmt))
    writer.dir.mkdir(parents=True, exist_ok=True)
    writer.json("scenario.json", {**sc, "resolved": {"triplet": triplet.to_json(), "t_max": t_max,
                                                      "integrator_rtol": rtol}})

    starts = [complex(*p) for p in sc["start_points"]]
    algebraic = classify_algebraic(triplet)
    if algebraic.hyperbolic:
        # exponential escape: a unit-step grid, the horizon is necessarily modest
        schedule = Schedule.uniform(t_max, max(8, min(int(math.ceil(t_max)), HYPERBOLIC_POINTS)))
    else:
        schedule = Schedule.geometric(t_max)
    orbits = [integrate_orbit(triplet, z, schedule, rtol=rtol) for z in starts]
    for k, o in enumerate(orbits):
        writer.series(f"orbit_{k}", ["t", "re", "im", "abs", "arg"], _orbit_rows(o))
    summary = {"orbits": [{"z0": o.z0, "t_max": o.t_max, "stats": o.stats.to_json(),
                           "julia_defect": o.julia_defect()} for o in orbits]}

    if "family" in sc:
        fam = sc["family"]
        params = dict(fam.get("params", {}))
        if isinstance(params.get("c"), list):
            params["c"] = complex(*params["c"])
        horizon = min(ORACLE_HORIZON, t_max)
        sched = Schedule.uniform(horizon, 200)
        errs = []
        for z in starts:
            num = integrate_orbit(triplet, z, sched, rtol=rtol)
            exact = closed_form_orbit(fam["name"], params, z, sched)
            errs.append(float(np.max(np.abs(num.values - exact.values) / np.abs(exact.values))))
        summary["oracle"] = {"horizon": horizon, "sup_relative_error": errs}

    step = algebraic.step
    if algebraic.kind == "parabolic" and step != "positive":
        step = hyperbolic_step_estimate(orbits[0], triplet, **step_kw).verdict
    disagree = False

    if "classify" in analyses:
        report = classify(triplet, orbits[0], step_kw=step_kw, shift_kw=shift_kw)
        writer.json("classification.json", report.to_json())
        disagree |= not report.criteria_agree()

    if "rate" in analyses:
        modes = [EXP_LAMBDA] if algebraic.hyperbolic else [SQRT_T, LINEAR_T]
        rates = []
        for o in orbits:
            entry = {"z0": o.z0}
            for mode in modes:
                lam = triplet.alpha if mode == EXP_LAMBDA else None
                entry[mode] = rate_estimate(o, mode, lam=lam, rtol=rate_rtol).to_json()
            if not algebraic.hyperbolic:
                entry["slope"] = slope(o).to_json()
            rates.append(entry)
        writer.json("rate.json", {"per_start_point": rates})

    if "koenigs" in analyses:
        chart = make_chart(triplet)
        chart_dump(triplet, chart, writer.dir / "koenigs_chart.json")
        writer.files.append("koenigs_chart.json")
        residual = abel_residual if chart.kind == PARABOLIC else schroeder_residual
        times = [t for t in (0.0, 1.0, 10.0, 100.0) if t <= t_max]
        kdata = {
            "chart": chart.to_json(),
            "residuals": [{"z": z, "t": t, "value": residual(triplet, chart, z, t)} for z in starts for t in times],
            "derivative_identity": [{"z": z, "relative_error": derivative_identity_error(triplet, chart, z)}
                                    for z in starts],
        }
        if chart.kind == PARABOLIC:
            kdata["sqrt_conformality"] = sqrt_conformality(triplet, chart).to_json()
        writer.json("koenigs.json", kdata)

    if "speed" in analyses:
        if algebraic.hyperbolic:
            mode = HYPERBOLIC
        else:
            mode = PHS if step == "positive" else ZERO_HS
        speeds = []
        for k, o in enumerate(orbits):
            s = total_speed_deviation(o, mode, lam=triplet.alpha or None)
            writer.series(f"speed_{k}", ["t", "deviation"], zip(s.t, s.deviation))
            speeds.append({"z0": o.z0, "mode": mode, "verdict": s.verdict, "limit": s.limit.to_json(),
                           "rate_check": s.rate_check})
        writer.json("speed.json", {"per_start_point": speeds})

    if "operators" in analyses:
        ops = sc.get("operators", {})
        tau = complex(*ops.get("tau", [1.0, 0.0]))
        ps = ops.get("p", [1, 2, 4])
        base = next((o for o in orbits if o.z0 == 1j), None) or integrate_orbit(triplet, 1j, schedule, rtol=rtol)
        disc = conjugate_orbit(base, tau)
        odata = {"tau": tau, "product_limit": product_check(disc).to_json(), "norms": []}
        if not algebraic.hyperbolic:
            r = disc_rates(disc)
            odata["disc_rates"] = {"verdict": r.verdict, "distance": r.distance_limit.to_json(),
                                   "boundary": r.boundary_limit.to_json(),
                                   "orthogonality": r.orthogonality.to_json()}
        for space in (HARDY, BERGMAN):
            for p in ps:
                g = norm_growth_check(disc, p, space, t_max=min(1e6, t_max))
                tag = f"norm_{space}_p{p:g}"
                writer.series(tag, ["t", "one_minus_abs_psi", "envelope_lower", "envelope_upper", "ratio_lower",
                                    "ratio_upper"],
                              zip(g.times, g.one_minus_abs_psi, g.lower, g.upper, g.ratio_lower, g.ratio_upper))
                odata["norms"].append({"space": space, "p": p, "verdict": g.verdict,
                                       "ratio_range": [float(np.min(g.ratio_lower, initial=np.inf)),
                                                       float(np.max(g.ratio_upper, initial=-np.inf))]})
        writer.json("operators.json", odata)

    if "cross_validate" in analyses:
        if algebraic.hyperbolic:
            summary["cross_validate"] = "skipped: hyperbolic generator"
        else:
            reports = [cross_validate(triplet, o, rtol=rate_rtol) for o in orbits]
            writer.json("validation.json", {"per_start_point": [dict(r.to_json(), z0=o.z0)
                                                                for r, o in zip(reports, orbits)]})
            for r in reports:
                if not r.agree:
                    disagree = True
                    result.messages.extend(f"{name}: {f}" for f in r.failures)

    summary["exit_code"] = EXIT_DISAGREE if disagree else EXIT_OK
    writer.json("summary.json", summary)
    result.files = sorted(writer.files)
    if disagree:
        result.exit_code = EXIT_DISAGREE
        result.messages.append(f"{name}: criteria disagree, see {writer.dir}")
    return result


def _run_one(args):
    sc, cfg = args
    return run_scenario(sc, cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semigroup-lab", description="Extremal-rate experiments for "
                                     "semigroups of holomorphic self-maps of the upper half-plane")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run scenario files or bundled scenarios")
    run.add_argument("scenarios", nargs="+", help="scenario JSON file or bundled scenario name")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--tol", type=float, default=DEFAULT_TOL, help="integrator relative tolerance")
    run.add_argument("--horizon", type=float, default=DEFAULT_HORIZON, help="final time t_max")
    run.add_argument("--format", choices=("csv", "json"), default="csv", help="format of series outputs")
    run.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    sub.add_parser("list", help="list bundled scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for n in bundled_names():
            print(n)
        return EXIT_OK
    if not (args.tol > 0 and args.horizon >= 1 and args.jobs >= 1):
        print("error: --tol must be positive, --horizon at least 1, --jobs at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        scenarios = [load_scenario(ref) for ref in args.scenarios]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    names = [sc["name"] for sc in scenarios]
    if len(set(names)) != len(names):
        print("error: scenario names must be unique within a batch", file=sys.stderr)
        return EXIT_INPUT
    cfg = RunConfig(Path(args.out), args.tol, args.horizon, args.format)
    jobs = [(sc, cfg) for sc in scenarios]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    code = EXIT_OK
    for res in results:
        for msg in res.messages:
            print(msg, file=sys.stderr if res.exit_code else sys.stdout)
        if res.exit_code == EXIT_OK:
            print(f"{res.name}: ok ({len(res.files)} files)")
        code = max(code, res.exit_code)
    return code


if __name__ == "__main__":
    sys.exit(main())
