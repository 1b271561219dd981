"""Command-line entry point ``qhgeo``.

Quaternions are given as JSON arrays ``[x0, x1, x2, x3]`` (or ``x0,x1,x2,x3``);
series as ``{"coeffs": [[...], ...]}`` inline or as a path to a JSON file.

Exit codes: 0 success, 1 suite failure, 2 usage or domain error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import NoConvergence, QHGeoError, QuadratureNotConverged
from .geodesics import cartesian_geodesic, distance_bounds, polyline_relax, shoot_distance
from .hardy import (SPHERE_CONSTANT, delta, hardy_norm2, inner_product, sphere_boundary_integral,
                    sphere_limit_norm)
from .metric import MODELS, curve_length
from .plotdata import SELECTORS, TRACE_COLUMNS, emit_plot_data, trace_csv
from .quat import to_json as quat_json
from .series import (MoebiusMap, RegularSeries, kernel_ball, kernel_ball_series, kernel_halfspace,
                     kernel_halfspace_series, regular_quotient, star_inverse, star_mul)
from .suites import SUITES, RunConfig, _plain, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3
SUITE_ALIASES = {"isometries": "metric-isometries"}


class UsageError(Exception):
    pass


# --- argument parsing helpers -----------------------------------------------------------


def _json_or_file(text: str):
    text = text.strip()
    if text[:1] in "[{":
        return json.loads(text)
    path = Path(text)
    if path.is_file():
        return json.loads(path.read_text())
    raise UsageError(f"expected inline JSON or a JSON file, got {text!r}")


def quaternion(text: str) -> np.ndarray:
    try:
        obj = json.loads(text) if text.strip()[:1] == "[" else [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad quaternion {text!r}") from exc
    q = np.asarray(obj, dtype=float)
    if q.shape != (4,):
        raise argparse.ArgumentTypeError(f"a quaternion has 4 components, got {text!r}")
    return q


def series(text: str) -> RegularSeries:
    try:
        return RegularSeries.from_json(_json_or_file(text))
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad series: {exc}") from exc


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.replace("-", "_"), json.loads(value)
    except json.JSONDecodeError:
        return key.replace("-", "_"), value


def _report(value, method, refinement_error, **extra) -> dict:
    out = {"value": value, "method": method, "refinementError": refinement_error}
    out.update(extra)
    return out


# --- subcommands ------------------------------------------------------------------------


def cmd_eval(args, cfg):
    if args.quotient is not None:
        value = regular_quotient(args.series, args.quotient, args.at)
        return {"value": quat_json(value), "method": "regular-quotient"}
    return {"value": quat_json(args.series(args.at)), "method": "series"}


def cmd_kernel(args, cfg):
    if args.space == "ball":
        closed = kernel_ball(args.w, args.at)
        approx = kernel_ball_series(args.w, args.degree)(args.at)
    else:
        closed = kernel_halfspace(args.w, args.at)
        approx = kernel_halfspace_series(args.w, args.at, args.degree)
    out = _report(quat_json(closed), "closed-form", float(np.linalg.norm(closed - approx)),
                  space=args.space, seriesDegree=args.degree)
    if args.series is not None:
        if args.space != "ball":
            raise UsageError("--series pairs with the ball kernel only")
        # reproducing property <f, k_w> = f(w)
        out["innerProduct"] = quat_json(inner_product(args.series, kernel_ball_series(args.w, args.degree)))
        out["valueAtW"] = quat_json(args.series(args.w))
    return out


def cmd_moebius(args, cfg):
    m = MoebiusMap(args.a, args.u)
    if args.degree is not None:
        expansion = star_mul(star_inverse(m.denominator, args.degree), m.numerator).truncate(args.degree)
        return expansion.scale_right(m.u).to_json()
    if args.at is None:
        raise UsageError("moebius needs --at or --degree")
    return {"value": quat_json(m(args.at)), "method": "moebius"}


def cmd_delta(args, cfg):
    value = delta(args.w, args.z, args.method)
    other = delta(args.w, args.z, "kernel" if args.method == "moebius" else "moebius")
    return _report(value, args.method, abs(value - other))


def cmd_norm(args, cfg):
    f = args.series
    if args.via == "series":
        return _report(hardy_norm2(f), "series", 0.0)
    if args.via == "boundary-quadrature":
        res = sphere_boundary_integral(f)
        return _report(res.value / SPHERE_CONSTANT, "boundary-quadrature", res.refinement_error,
                       integral=res.value, constant=SPHERE_CONSTANT)
    res = sphere_limit_norm(f, args.radius)
    scale = 1.0 - args.radius ** 2
    return _report(res.value / scale, "sphere-limit", res.refinement_error, radius=args.radius)


def cmd_dist(args, cfg):
    bounds = distance_bounds(args.q1, args.q2, args.model)
    out = bounds.to_json()
    out.update(method=args.method, model=args.model)
    if args.method == "shooting":
        try:
            length, _ = shoot_distance(args.q1, args.q2, args.model, budget=args.budget)
        except NoConvergence as exc:
            exc.result = out
            raise
        out["estimate"] = length
    elif args.method == "relax":
        out["estimate"] = curve_length(polyline_relax(args.q1, args.q2, args.segments, args.model))
    return out


def cmd_geodesic(args, cfg):
    trace = cartesian_geodesic(getattr(args, "from"), args.dir, args.length, args.model, args.samples)
    if args.format == "json":
        return {"columns": list(TRACE_COLUMNS), "rows": trace.rows().tolist()}
    return trace_csv(trace)


def cmd_verify(args, cfg):
    names = list(SUITES) if args.suite == "all" else [SUITE_ALIASES.get(args.suite, args.suite)]
    reports = [run_suite(name, cfg) for name in names]
    passed = all(r.passed for r in reports)
    if args.format == "csv":
        text = "".join(r.dumps("csv").split("\n", 1)[1] if k else r.dumps("csv") for k, r in enumerate(reports))
    elif len(reports) == 1:
        text = reports[0].dumps("json")
    else:
        text = _dumps({"pass": passed, "suites": [r.to_json() for r in reports]})
    return text, passed


def cmd_plot_data(args, cfg):
    return emit_plot_data(args.what, dict(args.param))


def _dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


# --- parser -----------------------------------------------------------------------------


def _common(defaults: bool) -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(None), help="RNG seed (env QHGEO_SEED otherwise)")
    p.add_argument("--config", default=d(None), help="RunConfig JSON file")
    p.add_argument("--format", choices=("json", "csv"), default=d(None), help="output format")
    p.add_argument("--out", default=d(None), help="write output to this path instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhgeo", parents=[_common(True)],
                                     description="Quaternionic Hardy-space geometry toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(False)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("eval", cmd_eval, "evaluate a regular series at a point")
    p.add_argument("series", type=series)
    p.add_argument("--at", type=quaternion, required=True)
    p.add_argument("--quotient", type=series, default=None,
                   help="evaluate series^-* * QUOTIENT instead")

    p = add("kernel", cmd_kernel, "reproducing kernel k_w(q), closed form vs truncated series")
    p.add_argument("--space", choices=MODELS, default="ball")
    p.add_argument("--w", type=quaternion, required=True)
    p.add_argument("--at", type=quaternion, required=True)
    p.add_argument("--degree", type=int, default=200)
    p.add_argument("--series", type=series, default=None, help="also report <f, k_w> and f(w)")

    p = add("moebius", cmd_moebius, "regular Moebius map M_a(q) u, or its series")
    p.add_argument("--a", type=quaternion, required=True)
    p.add_argument("--u", type=quaternion, default=np.array([1.0, 0.0, 0.0, 0.0]))
    p.add_argument("--at", type=quaternion, default=None)
    p.add_argument("--degree", type=int, default=None, help="emit the series truncated at DEGREE")

    p = add("delta", cmd_delta, "pseudo-hyperbolic distance in the ball")
    p.add_argument("--w", type=quaternion, required=True)
    p.add_argument("--z", type=quaternion, required=True)
    p.add_argument("--method", choices=("moebius", "kernel"), default="moebius")

    p = add("norm", cmd_norm, "Hardy norm squared of a series")
    p.add_argument("series", type=series)
    p.add_argument("--via", choices=("series", "boundary-quadrature", "sphere-limit"), default="series")
    p.add_argument("--radius", type=float, default=0.9999)

    p = add("dist", cmd_dist, "distance bounds and estimates")
    p.add_argument("q1", type=quaternion)
    p.add_argument("q2", type=quaternion)
    p.add_argument("--method", choices=("bounds", "shooting", "relax"), default="bounds")
    p.add_argument("--model", choices=MODELS, default="ball")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--segments", type=int, default=64)

    p = add("geodesic", cmd_geodesic, "unit-speed geodesic trace as CSV")
    p.add_argument("--model", choices=MODELS, default="ball")
    p.add_argument("--from", type=quaternion, required=True)
    p.add_argument("--dir", type=quaternion, required=True)
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--samples", type=int, default=201)

    p = add("verify", cmd_verify, "run a verification suite")
    p.add_argument("--suite", choices=["all", *SUITES, *SUITE_ALIASES], default="all")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--model", choices=MODELS, default=None, help="restrict model-specific checks")

    p = add("plot-data", cmd_plot_data, "CSV data for plots")
    p.add_argument("what", help=f"one of {', '.join(SELECTORS)}")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    return parser


def _config(args) -> RunConfig:
    obj = {}
    if args.config:
        obj = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        obj["seed"] = args.seed
    elif "seed" not in obj and os.environ.get("QHGEO_SEED"):
        obj["seed"] = int(os.environ["QHGEO_SEED"])
    for key in ("trials", "model"):
        if getattr(args, key, None) is not None:
            obj[key] = getattr(args, key)
    if args.format is not None:
        obj["format"] = args.format
    if args.out is not None:
        obj["out"] = args.out
    return RunConfig.from_json(obj)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        args.format = args.format or ("csv" if args.command in ("geodesic", "plot-data") else "json")
        result = args.func(args, cfg)
    except (NoConvergence, QuadratureNotConverged) as exc:
        print(f"qhgeo: no convergence: {exc}", file=sys.stderr)
        if isinstance(getattr(exc, "result", None), dict):
            sys.stderr.write(_dumps(exc.result))
        return EXIT_NOCONV
    except (UsageError, QHGeoError, ValueError, KeyError, OSError, ZeroDivisionError) as exc:
        print(f"qhgeo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = True
    if isinstance(result, tuple):
        result, passed = result
    _emit(result if isinstance(result, str) else _dumps(result), args.out)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
