"""Verification suites: randomized checks of the library's invariants.

Every check draws from its own counter-based stream keyed by
``(seed, suite, check, trial)``, so a report depends only on the
configuration and the trial count, never on execution order.  Reports omit
wall-clock timing unless asked, which keeps repeated runs byte-identical.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import NoConvergence, UnknownSuite
from .geodesics import (SurfaceState, bilateral_quantity, cartesian_geodesic, distance_bounds,
                        polyline_relax, shoot_distance, surface_geodesic, surface_to_cartesian)
from .hardy import (HALFSPACE_CONSTANT, SPHERE_CONSTANT, ExponentialDensity, PolyExpDensity, delta,
                    donatini_rescaling_check, halfspace_boundary_integral, hardy_norm2,
                    sphere_boundary_integral, sphere_limit_norm)
from .metric import IsometryMap, curve_length, metric_norm, pullback_ratio, random_rotation
from .quat import I, J, ONE, ZERO, inv, mul, norm, quat
from .series import (MoebiusMap, RegularSeries, cayley, cayley_inv, kernel_ball, kernel_ball_series,
                     kernel_halfspace, kernel_halfspace_series, regular_quotient, star_inverse,
                     star_mul, star_pointwise_identity)

__all__ = ["RunConfig", "Check", "SuiteReport", "SUITES", "run_suite", "stream"]

EPS = np.finfo(float).eps

#: default tolerances; ``RunConfig.tolerances`` overrides them by check name
TOLERANCES = {
    "quat_inverse_ulp": 4.0,
    "star_inverse_residual": 1e-11,
    "pointwise_identity": 1e-12,
    "regular_quotient": 1e-11,
    "cayley_round_trip": 1e-13,
    "kernel_series_ball": 1e-10,
    "kernel_series_halfspace": 1e-10,
    "donatini_rescaling": 1e-10,
    "delta_routes": 1e-12,
    "delta_origin": 0.0,
    "metric_delta_link": 5e-3,
    "isometry": 1e-6,
    "non_invariance": 1e-2,
    "surface_conservation": 1e-8,
    "cartesian_energy": 1e-7,
    "slice_preserved": 1e-8,
    "imaginary_locus": 1e-6,
    "great_circle": 1e-6,
    "radial_distance": 1e-6,
    "integrator_agreement": 1e-6,
    "bounds_order": 1e-9,
    "bilateral_ratio": 50.0,
    "shooting_bracket": 1e-6,
    "shooting_symmetry": 1e-5,
    "triangle_upper": 1e-6,
    "orthogonal_slice_limit": 2e-2,
    "constant_spread": 1e-3,
    "contraction": 1e-8,
}

BALL_MARGIN = 0.05


@dataclass(frozen=True)
class RunConfig:
    """Everything a suite run depends on."""

    seed: int = 0
    trials: int = 1000
    tolerances: dict = field(default_factory=dict)
    quadrature: tuple = ()
    out: str | None = None
    format: str = "json"
    timing: bool = False
    model: str | None = None

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.trials) < 1:
            raise ValueError("trials must be positive")
        if self.model not in (None, "ball", "halfspace"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        unknown = set(self.tolerances) - set(TOLERANCES)
        if unknown:
            raise ValueError(f"unknown tolerance names {sorted(unknown)}")

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {k: v for k, v in obj.items() if k in cls.__dataclass_fields__}
        if "quadrature" in known:
            known["quadrature"] = tuple(tuple(x) for x in known["quadrature"])
        return cls(**known)

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, TOLERANCES[name]))

    def to_json(self) -> dict:
        d = asdict(self)
        d["quadrature"] = [list(x) for x in self.quadrature]
        return d


@dataclass
class Check:
    """``pass`` is ``value <= tolerance``; with ``relation=">"`` it is ``value > tolerance``.

    Non-gating checks are reported but do not affect the suite verdict.
    """

    name: str
    value: float
    tolerance: float
    samples: int
    relation: str = "<="
    gating: bool = True
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value > self.tolerance if self.relation == ">" else self.value <= self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "maxDeviation": self.value, "tolerance": self.tolerance,
                "relation": self.relation, "pass": self.passed, "gating": self.gating,
                "samples": self.samples, "info": self.info}


@dataclass
class SuiteReport:
    suite: str
    trials: int
    checks: list
    config: RunConfig
    timing: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        bounded = [c.value for c in self.checks if c.gating and c.relation == "<="]
        return {"suite": self.suite, "trials": self.trials, "pass": self.passed,
                "maxDeviation": max(bounded) if bounded else None,
                "checks": [c.to_json() for c in self.checks], "timing": self.timing,
                "config": self.config.to_json()}

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(_plain(self.to_json()), indent=2, sort_keys=True) + "\n"
        lines = ["suite,check,maxDeviation,tolerance,relation,pass,gating,samples"]
        for c in self.checks:
            lines.append(f"{self.suite},{c.name},{c.value!r},{c.tolerance!r},{c.relation},"
                         f"{str(c.passed).lower()},{str(c.gating).lower()},{c.samples}")
        return "\n".join(lines) + "\n"


def _plain(obj):
    """Convert numpy scalars and arrays for JSON."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


# --- random streams ---------------------------------------------------------------------


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for the integer key path ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


class _Draws:
    """Per-trial generators for one check."""

    def __init__(self, cfg: RunConfig, suite: int, check: int):
        self.seed, self.suite, self.check = cfg.seed, suite, check

    def __call__(self, trial: int) -> np.random.Generator:
        return stream(self.seed, self.suite, self.check, trial)


def _ball_point(rng, rmax=1.0 - BALL_MARGIN):
    v = rng.normal(size=4)
    return v / np.linalg.norm(v) * rmax * rng.random() ** 0.25


def _unit_imag(rng):
    v = rng.normal(size=3)
    return np.concatenate(([0.0], v / np.linalg.norm(v)))


def _hs_point(rng, margin=BALL_MARGIN):
    return quat(rng.uniform(margin, 3.0), *rng.uniform(-3.0, 3.0, 3))


def _invertible_series(rng, deg):
    # |c_0| > sum |c_n| keeps f zero-free on a neighbourhood of the closed ball
    c = rng.normal(size=(deg + 1, 4)) * 0.3
    c[0] = ONE + 0.2 * rng.normal(size=4)
    tail = np.linalg.norm(c[1:], axis=1).sum()
    if tail > 0:
        c[1:] *= min(1.0, 0.9 * np.linalg.norm(c[0]) / tail)
    return RegularSeries(c)


def _count(cfg, per_thousand):
    return max(1, round(cfg.trials * per_thousand / 1000))


# --- algebra ------------------------------------------------------------------------------


def _algebra(cfg, draws):
    checks = []
    n = _count(cfg, 1000)
    worst = 0.0
    for t in range(n):
        rng = draws(0)(t)
        q = rng.normal(size=4) * 10.0 ** rng.uniform(-3, 3)
        worst = max(worst, float(np.max(np.abs(mul(q, inv(q)) - ONE))) / EPS)
    checks.append(Check("quat_inverse_ulp", worst, cfg.tol("quat_inverse_ulp"), n))

    worst = 0.0
    for t in range(n):
        rng = draws(1)(t)
        f = _invertible_series(rng, int(rng.integers(0, 7)))
        m = int(rng.integers(1, 31))
        prod = star_mul(f, star_inverse(f, m)).coeffs
        res = np.zeros((m + 1, 4))
        res[: min(len(prod), m + 1)] = prod[: m + 1]
        res[0] -= ONE
        worst = max(worst, float(np.max(np.abs(res))))
    checks.append(Check("star_inverse_residual", worst, cfg.tol("star_inverse_residual"), n))

    n10 = _count(cfg, 10000)
    worst = 0.0
    for t in range(n10):
        rng = draws(2)(t)
        f = RegularSeries(rng.normal(size=(int(rng.integers(1, 6)), 4)))
        g = RegularSeries(rng.normal(size=(int(rng.integers(1, 6)), 4)))
        lhs, rhs = star_pointwise_identity(f, g, _ball_point(rng))
        worst = max(worst, float(norm(lhs - rhs)) / (1.0 + float(norm(lhs))))
    checks.append(Check("pointwise_identity", worst, cfg.tol("pointwise_identity"), n10))

    worst = 0.0
    for t in range(n):
        rng = draws(3)(t)
        f = _invertible_series(rng, int(rng.integers(0, 4)))
        g = RegularSeries(rng.normal(size=(int(rng.integers(1, 4)), 4)) * 0.5)
        q = _ball_point(rng, 0.6)
        series = star_mul(star_inverse(f, 160), g)(q)
        worst = max(worst, float(norm(regular_quotient(f, g, q) - series)))
    checks.append(Check("regular_quotient", worst, cfg.tol("regular_quotient"), n))

    worst = 0.0
    for t in range(n):
        q = _ball_point(draws(4)(t))
        worst = max(worst, float(norm(cayley_inv(cayley(q)) - q)))
    checks.append(Check("cayley_round_trip", worst, cfg.tol("cayley_round_trip"), n))
    return checks


# --- kernels ------------------------------------------------------------------------------


def _kernels(cfg, draws):
    checks = []
    n = _count(cfg, 1000)
    worst = 0.0
    for t in range(n):
        rng = draws(0)(t)
        w, q = _ball_point(rng, 0.7), _ball_point(rng, 0.7)
        worst = max(worst, float(norm(kernel_ball(w, q) - kernel_ball_series(w, 200)(q))))
    checks.append(Check("kernel_series_ball", worst, cfg.tol("kernel_series_ball"), n))

    worst = 0.0
    for t in range(n):
        rng = draws(1)(t)
        # grid over the ball preimages |p|, |s| <= 0.7 of the half-space pair
        w, q = cayley(_ball_point(rng, 0.7)), cayley(_ball_point(rng, 0.7))
        diff = kernel_halfspace(w, q) - kernel_halfspace_series(w, q, 200)
        worst = max(worst, float(norm(diff)))
    checks.append(Check("kernel_series_halfspace", worst, cfg.tol("kernel_series_halfspace"), n))

    worst = 0.0
    for t in range(n):
        rng = draws(2)(t)
        lhs, rhs = donatini_rescaling_check(_hs_point(rng), _hs_point(rng))
        worst = max(worst, float(norm(lhs - rhs)) / max(1.0, float(norm(lhs))))
    checks.append(Check("donatini_rescaling", worst, cfg.tol("donatini_rescaling"), n))

    n10 = _count(cfg, 10000)
    worst_routes = worst_origin = 0.0
    for t in range(n10):
        rng = draws(3)(t)
        w, z = _ball_point(rng), _ball_point(rng)
        worst_routes = max(worst_routes, abs(delta(w, z, "kernel") - delta(w, z, "moebius")))
        worst_origin = max(worst_origin, abs(delta(ZERO, w) - float(norm(w))))
    checks.append(Check("delta_routes", worst_routes, cfg.tol("delta_routes"), n10))
    checks.append(Check("delta_origin", worst_origin, cfg.tol("delta_origin"), n10))
    return checks


# --- metric and isometries ----------------------------------------------------------------


def _isometry_families(rng):
    lam = rng.uniform(-0.9, 0.9)
    rot = random_rotation(rng)
    dil = rng.uniform(0.2, 5.0)
    return {
        "moebius_real": (IsometryMap("moebius_real", lam), "ball", "ball"),
        "sphere_isometry": (IsometryMap("sphere_isometry", rot), "ball", "ball"),
        "reflection": (IsometryMap("reflection"), "ball", "ball"),
        "hs_dilation": (IsometryMap("hs_dilation", dil), "halfspace", "halfspace"),
        "hs_sphere_isometry": (IsometryMap("hs_sphere_isometry", rot), "halfspace", "halfspace"),
        "hs_inversion": (IsometryMap("hs_inversion"), "halfspace", "halfspace"),
        "cayley": (cayley, "ball", "halfspace"),
    }


def _non_invariance_search(draws, n):
    """Largest sampled ``|ratio - 1|`` for the Mobius map with parameter ``i/2``."""
    m = MoebiusMap(0.5 * I, ONE)
    best = (0.0, None, None)
    for t in range(n):
        rng = draws(t)
        w, d = _ball_point(rng, 0.9), rng.normal(size=4)
        dev = abs(pullback_ratio(m, w, d) - 1.0)
        if dev > best[0]:
            best = (dev, w, d)
    dev, w, d = best
    info = {"map": {"kind": "moebius", "a": [0.0, 0.5, 0.0, 0.0], "u": [1.0, 0.0, 0.0, 0.0]},
            "point": w, "vector": d}
    return dev, info


def _metric_isometries(cfg, draws):
    checks = []
    n = _count(cfg, 1000)
    families = _isometry_families(np.random.default_rng(0))
    for k, name in enumerate(families):
        if cfg.model is not None and cfg.model not in families[name][1:]:
            continue
        worst = 0.0
        for t in range(n):
            rng = draws(k)(t)
            fmap, src, dst = _isometry_families(rng)[name]
            w = _ball_point(rng) if src == "ball" else _hs_point(rng)
            worst = max(worst, abs(pullback_ratio(fmap, w, rng.normal(size=4), src, dst) - 1.0))
        checks.append(Check(f"isometry_{name}", worst, cfg.tol("isometry"), n))

    if cfg.model == "halfspace":
        return checks
    worst = 0.0
    eps = 1e-4
    for t in range(n):
        rng = draws(len(families))(t)
        w = _ball_point(rng, 0.9)
        d = rng.normal(size=4)
        d /= np.linalg.norm(d)
        ratio = delta(w, w + eps * d) / (eps * metric_norm(w, d))
        worst = max(worst, abs(ratio - 1.0))
    checks.append(Check("metric_delta_link", worst, cfg.tol("metric_delta_link"), n))

    dev, info = _non_invariance_search(draws(len(families) + 1), n)
    checks.append(Check("non_invariance", dev, cfg.tol("non_invariance"), n, relation=">", info=info))
    return checks


# --- geodesics ----------------------------------------------------------------------------


def _geodesics(cfg, draws):
    checks = []
    n = _count(cfg, 20)
    length = 20.0
    worst = 0.0
    for t in range(n):
        rng = draws(0)(t)
        init = SurfaceState.unit_speed(rng.uniform(0.2, 1.5), 0.0, rng.uniform(0.05, math.pi - 0.05))
        trace = surface_geodesic(init, length)
        a = max(abs(st.A - init.A) for st in trace)
        e = max(abs(st.energy - init.energy) for st in trace)
        worst = max(worst, a / length, e / length)
    checks.append(Check("surface_conservation", worst, cfg.tol("surface_conservation"), n))

    ng = _count(cfg, 10)
    energy = slices = locus = circle = 0.0
    for t in range(ng):
        rng = draws(1)(t)
        # generic start: energy and great-circle constraint
        w = _ball_point(rng, 0.6)
        tr = cartesian_geodesic(w, rng.normal(size=4), 4.0)
        energy = max(energy, tr.energy_drift(), float(np.max(np.abs(np.sqrt(tr.energy) - 1.0))))
        u = w[1:] / np.linalg.norm(w[1:])
        dv = tr.velocities[0, 1:] - (tr.velocities[0, 1:] @ u) * u
        normal = np.cross(u, dv)
        normal /= np.linalg.norm(normal)
        units = tr.points[:, 1:] / np.linalg.norm(tr.points[:, 1:], axis=1)[:, None]
        circle = max(circle, float(np.max(np.abs(units @ normal))))
        # slice: start and velocity in the slice of a random unit
        unit = _unit_imag(rng)
        z, v = rng.normal(size=2) * 0.3, rng.normal(size=2)
        tr = cartesian_geodesic(z[0] * ONE + z[1] * unit, v[0] * ONE + v[1] * unit, 4.0)
        off = tr.points[:, 1:] - np.outer(tr.points[:, 1:] @ unit[1:], unit[1:])
        slices = max(slices, float(np.max(np.abs(off))))
        # purely imaginary start and velocity
        v = rng.normal(size=4)
        v[0] = 0.0
        tr = cartesian_geodesic(0.5 * rng.random() * _unit_imag(rng), v, 4.0)
        locus = max(locus, float(np.max(np.abs(tr.points[:, 0]))))
    checks.append(Check("cartesian_energy", energy, cfg.tol("cartesian_energy"), ng))
    checks.append(Check("slice_preserved", slices, cfg.tol("slice_preserved"), ng))
    checks.append(Check("imaginary_locus", locus, cfg.tol("imaginary_locus"), ng))
    checks.append(Check("great_circle", circle, cfg.tol("great_circle"), ng))

    worst = 0.0
    for t in range(ng):
        rng = draws(2)(t)
        tr = cartesian_geodesic(ZERO, rng.normal(size=4), 3.0)
        worst = max(worst, float(np.max(np.abs(np.arctanh(np.linalg.norm(tr.points, axis=1)) - tr.s))))
        x0 = rng.uniform(-0.6, 0.6)
        tr = cartesian_geodesic(x0 * ONE, ONE, 2.0)
        expected = np.arctanh(tr.points[:, 0]) - math.atanh(x0)
        worst = max(worst, float(np.max(np.abs(expected - tr.s))))
    checks.append(Check("radial_distance", worst, cfg.tol("radial_distance"), 2 * ng))

    worst = 0.0
    for t in range(ng):
        rng = draws(3)(t)
        init = SurfaceState.unit_speed(rng.uniform(0.3, 1.0), rng.uniform(0, 2 * math.pi),
                                       rng.uniform(0.3, math.pi - 0.3))
        e1 = _unit_imag(rng)
        e2 = _unit_imag(rng)
        e2 = e2 - (e2 @ e1) * e1
        e2 /= np.linalg.norm(e2)
        surf = surface_geodesic(init, 5.0, samples=51)
        w0, v0 = surface_to_cartesian(init, e1, e2)
        # positions only need 1e-6 here; energy-grade tolerances cost 10x near the boundary
        tr = cartesian_geodesic(w0, v0, 5.0, samples=51, rtol=1e-11, atol=1e-13)
        expected = np.array([surface_to_cartesian(st, e1, e2)[0] for st in surf])
        worst = max(worst, float(np.max(np.abs(tr.points - expected))))
    checks.append(Check("integrator_agreement", worst, cfg.tol("integrator_agreement"), ng))
    return checks


# --- distance estimates -------------------------------------------------------------------


def _distance_estimates(cfg, draws):
    checks = []
    n = _count(cfg, 1000)
    order = up_ratio = low_ratio = 0.0
    for t in range(n):
        rng = draws(0)(t)
        q1, q2 = _ball_point(rng), _ball_point(rng)
        b = distance_bounds(q1, q2)
        s = bilateral_quantity(q1, q2)
        order = max(order, b.lower - b.upper)
        up_ratio = max(up_ratio, b.upper / s)
        if b.lower > 0.0:
            low_ratio = max(low_ratio, s / b.lower)
        else:
            low_ratio = math.inf if s > 0 else low_ratio
    checks.append(Check("bounds_order", order, cfg.tol("bounds_order"), n))
    checks.append(Check("ratio_upper_over_S", up_ratio, cfg.tol("bilateral_ratio"), n))
    checks.append(Check("ratio_S_over_lower", low_ratio, cfg.tol("bilateral_ratio"), n))

    ns = _count(cfg, 5)
    bracket = sym = 0.0
    failures = 0
    for t in range(ns):
        rng = draws(1)(t)
        q1, q2 = _ball_point(rng, 0.9), _ball_point(rng, 0.9)
        try:
            l12, _ = shoot_distance(q1, q2)
            l21, _ = shoot_distance(q2, q1)
        except NoConvergence:
            failures += 1
            continue
        b = distance_bounds(q1, q2)
        bracket = max(bracket, b.lower - l12, l12 - b.upper)
        sym = max(sym, abs(l12 - l21))
    checks.append(Check("shooting_bracket", bracket, cfg.tol("shooting_bracket"), ns,
                        info={"nonConverged": failures}))
    checks.append(Check("shooting_symmetry", sym, cfg.tol("shooting_symmetry"), ns))

    r = 0.999
    length = curve_length(polyline_relax(r * I, r * J, n=64))
    target = 0.25 * math.pi
    checks.append(Check("orthogonal_slice_limit", abs(length - target) / target,
                        cfg.tol("orthogonal_slice_limit"), 1,
                        info={"length": length, "target": target, "radius": r}))

    worst = 0.0
    witness = None
    for t in range(n):
        rng = draws(2)(t)
        q1, q2, q3 = _ball_point(rng), _ball_point(rng), _ball_point(rng)
        gap = (distance_bounds(q1, q3).upper - distance_bounds(q1, q2).upper
               - distance_bounds(q2, q3).upper)
        if gap > worst:
            worst, witness = gap, [q1, q2, q3]
    # the upper bound is not a path metric, so this is informational only
    checks.append(Check("triangle_upper", worst, cfg.tol("triangle_upper"), n, gating=False,
                        info={"witness": witness}))
    return checks


# --- boundary integrals -------------------------------------------------------------------


SPHERE_TEST_SET = (
    RegularSeries([ONE]),
    RegularSeries([ZERO, ONE]),
    RegularSeries([ZERO, ZERO, ONE]),
    RegularSeries([quat(1, 2, 0, -1), quat(0.5, 0, 1, 0.3)]),
    RegularSeries([quat(0.2, 0, 0, 1), I, quat(0, 0, -0.5, 0), quat(1, 1, 1, 1)]),
)

HALFSPACE_TEST_SET = (
    PolyExpDensity(1.0),
    PolyExpDensity(2.0),
    PolyExpDensity(1.0, np.array([[1, 0, 0, 0], [0, 1, 1, 0.0]])),
    PolyExpDensity(0.7, np.array([[0, 0, 1, 0], [0.3, 0, 0, 0], [0, 0.2, 0, 0.1]])),
    ExponentialDensity(quat(1.5, 0.5, 0.2, 0), quat(1, 1, 0, 0)),
)


def _spread(values):
    values = np.asarray(values)
    return float(np.ptp(values) / abs(np.mean(values)))


def sphere_ratios(extra: int = 0, rng=None):
    fs = list(SPHERE_TEST_SET)
    for _ in range(extra):
        fs.append(RegularSeries(rng.normal(size=(int(rng.integers(1, 5)), 4))))
    results = [sphere_boundary_integral(f) for f in fs]
    return [r.value / hardy_norm2(f) for r, f in zip(results, fs)], [r.refinement_error for r in results]


def halfspace_ratios(extra: int = 0, rng=None):
    Fs = list(HALFSPACE_TEST_SET)
    for _ in range(extra):
        Fs.append(ExponentialDensity(_hs_point(rng, 0.3), rng.normal(size=4)))
    results = [halfspace_boundary_integral(F) for F in Fs]
    return [r.value / F.norm2() for r, F in zip(results, Fs)], [r.refinement_error for r in results]


def _boundary_integrals(cfg, draws):
    checks = []
    extra = _count(cfg, 4)
    ratios, errs = sphere_ratios(extra, draws(0)(0))
    mean = float(np.mean(ratios))
    checks.append(Check("sphere_constant_spread", _spread(ratios), cfg.tol("constant_spread"), len(ratios),
                        info={"constant": mean, "derived": SPHERE_CONSTANT, "stated": math.pi / 2,
                              "conventionDiscrepancy": abs(mean - math.pi / 2) > 1e-3 * mean,
                              "refinementErrors": errs}))
    ratios, errs = halfspace_ratios(extra, draws(1)(0))
    mean = float(np.mean(ratios))
    checks.append(Check("halfspace_constant_spread", _spread(ratios), cfg.tol("constant_spread"),
                        len(ratios),
                        info={"constant": mean, "derived": HALFSPACE_CONSTANT, "stated": math.pi**2,
                              "conventionDiscrepancy": abs(mean - math.pi**2) > 1e-3 * mean,
                              "refinementErrors": errs}))
    limits = {}
    for r in (0.9, 0.99, 0.999, 0.9999):
        limits[str(r)] = [sphere_limit_norm(f, r).value / hardy_norm2(f) for f in SPHERE_TEST_SET[:4]]
    checks.append(Check("sphere_limit_spread", _spread(limits["0.9999"]), cfg.tol("constant_spread"), 4,
                        info={"radius": 0.9999, "ratiosByRadius": limits}))
    return checks


# --- contraction and non-invariance -------------------------------------------------------


def _contraction(cfg, draws):
    checks = []
    n = _count(cfg, 1000)
    square, cube = RegularSeries.monomial(2), RegularSeries.monomial(3)
    for k, name in enumerate(("q2", "q3", "moebius_real", "product")):
        worst = 0.0
        for t in range(n):
            rng = draws(k)(t)
            m = MoebiusMap(quat(rng.uniform(-0.9, 0.9)), ONE)
            fmap = {"q2": square, "q3": cube, "moebius_real": m,
                    "product": lambda q, m=m: mul(m(q), square(q))}[name]
            w = _ball_point(rng)
            worst = max(worst, pullback_ratio(fmap, w, rng.normal(size=4)) - 1.0)
        checks.append(Check(f"contraction_{name}", worst, cfg.tol("contraction"), n))
    m = MoebiusMap(0.5 * I, ONE)
    best, info = 0.0, {}
    for t in range(n):
        rng = draws(4)(t)
        w, d = _ball_point(rng, 0.9), rng.normal(size=4)
        ratio = pullback_ratio(m, w, d)
        if ratio > best:
            best, info = ratio, {"point": w, "vector": d}
    checks.append(Check("expansion_moebius_i_half", best - 1.0, cfg.tol("non_invariance"), n,
                        relation=">", info=info))
    return checks


def _non_invariance(cfg, draws):
    n = _count(cfg, 1000)
    dev, info = _non_invariance_search(draws(0), n)
    return [Check("non_invariance", dev, cfg.tol("non_invariance"), n, relation=">", info=info)]


SUITES: dict[str, Callable] = {
    "algebra": _algebra,
    "kernels": _kernels,
    "metric-isometries": _metric_isometries,
    "geodesics": _geodesics,
    "distance-estimates": _distance_estimates,
    "boundary-integrals": _boundary_integrals,
    "contraction": _contraction,
    "non-invariance": _non_invariance,
}


def run_suite(name: str, cfg: RunConfig | None = None) -> SuiteReport:
    """Run one suite; the report is a pure function of ``(name, cfg)`` unless timing is on."""
    cfg = RunConfig() if cfg is None else cfg
    if name not in SUITES:
        raise UnknownSuite(name)
    index = list(SUITES).index(name)
    start = time.perf_counter()
    checks = SUITES[name](cfg, lambda check: _Draws(cfg, index, check))
    elapsed = time.perf_counter() - start if cfg.timing else None
    return SuiteReport(name, cfg.trials, checks, cfg, elapsed)
