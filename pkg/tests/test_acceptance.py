"""Acceptance criteria at their stated sample counts, tolerances and runtime bounds.

Each test prints one ``PASS``/``FAIL`` line (collected again in the terminal
summary) and then asserts. Run alone with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

import conftest
from qhgeo.geodesics import (SurfaceState, bilateral_quantity, cartesian_geodesic, distance_bounds,
                             polyline_relax, surface_geodesic, surface_to_cartesian)
from qhgeo.hardy import HALFSPACE_CONSTANT, SPHERE_CONSTANT, delta, donatini_rescaling_check
from qhgeo.metric import curve_length, metric_norm, pullback_ratio
from qhgeo.quat import I, J, ONE, ZERO, mul, norm
from qhgeo.series import (MoebiusMap, RegularSeries, cayley, kernel_ball, kernel_ball_series,
                          kernel_halfspace, kernel_halfspace_series, star_inverse, star_mul,
                          star_pointwise_identity)
from qhgeo.suites import (_ball_point, _hs_point, _invertible_series, _isometry_families, _unit_imag,
                          halfspace_ratios, sphere_ratios, stream)

SEED = 20260101


def draws(criterion, check):
    return lambda trial: stream(SEED, 100 + criterion, check, trial)


def record(number, title, passed, detail, elapsed, limit):
    within = elapsed < limit
    ok = passed and within
    line = (f"{'PASS' if ok else 'FAIL'} {number:2d} {title}: {detail}; "
            f"{elapsed:.2f} s (limit {limit:g} s)")
    conftest.ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_01_star_algebra():
    with Timer() as clock:
        residual = 0.0
        for t in range(1000):
            rng = draws(1, 0)(t)
            f = _invertible_series(rng, int(rng.integers(0, 7)))
            m = int(rng.integers(1, 31))
            prod = star_mul(f, star_inverse(f, m)).coeffs
            res = np.zeros((m + 1, 4))
            res[: min(len(prod), m + 1)] = prod[: m + 1]
            res[0] -= ONE
            residual = max(residual, float(np.max(np.abs(res))))
        pointwise = 0.0
        for t in range(10_000):
            rng = draws(1, 1)(t)
            f = RegularSeries(rng.normal(size=(int(rng.integers(1, 6)), 4)))
            g = RegularSeries(rng.normal(size=(int(rng.integers(1, 6)), 4)))
            lhs, rhs = star_pointwise_identity(f, g, _ball_point(rng))
            pointwise = max(pointwise, float(norm(lhs - rhs)))
    passed = residual <= 1e-11 and pointwise <= 1e-12
    assert record(1, "star algebra", passed,
                  f"f*f^-* - 1 residual {residual:.2e} <= 1e-11 (1000 series), "
                  f"pointwise identity {pointwise:.2e} <= 1e-12 (10000 evaluations)",
                  clock.elapsed, 10)


def test_02_kernel_closed_form_vs_series():
    with Timer() as clock:
        ball = half = 0.0
        for t in range(1000):
            rng = draws(2, 0)(t)
            w, q = _ball_point(rng, 0.7), _ball_point(rng, 0.7)
            ball = max(ball, float(norm(kernel_ball(w, q) - kernel_ball_series(w, 200)(q))))
            # half-space pair whose ball preimages satisfy |q|, |w| <= 0.7
            hw, hq = cayley(_ball_point(rng, 0.7)), cayley(_ball_point(rng, 0.7))
            half = max(half, float(norm(kernel_halfspace(hw, hq) - kernel_halfspace_series(hw, hq, 200))))
    assert record(2, "kernel closed form vs series N=200", ball <= 1e-10 and half <= 1e-10,
                  f"ball {ball:.2e}, half-space {half:.2e} <= 1e-10 (1000 pairs each)", clock.elapsed, 5)


def test_03_delta_coherence():
    with Timer() as clock:
        routes = origin = 0.0
        for t in range(10_000):
            rng = draws(3, 0)(t)
            w, z = _ball_point(rng), _ball_point(rng)
            routes = max(routes, abs(delta(w, z, "kernel") - delta(w, z, "moebius")))
            origin = max(origin, abs(delta(ZERO, w) - float(norm(w))))
    assert record(3, "delta coherence", routes <= 1e-12 and origin == 0.0,
                  f"kernel vs Moebius route {routes:.2e} <= 1e-12, |delta(0,w) - |w|| = {origin:g} "
                  "(10000 pairs)", clock.elapsed, 5)


def test_04_metric_delta_link():
    eps = 1e-4
    with Timer() as clock:
        lo, hi = math.inf, -math.inf
        for t in range(1000):
            rng = draws(4, 0)(t)
            w = _ball_point(rng, 0.9)
            d = rng.normal(size=4)
            ratio = delta(w, w + eps * d) / (eps * metric_norm(w, d))
            lo, hi = min(lo, ratio), max(hi, ratio)
    assert record(4, "metric and delta link", 0.995 <= lo and hi <= 1.005,
                  f"ratio range [{lo:.6f}, {hi:.6f}] within [0.995, 1.005] (1000 pairs, eps 1e-4)",
                  clock.elapsed, 10)


def test_05_isometries_and_non_invariance():
    with Timer() as clock:
        worst = {}
        names = list(_isometry_families(np.random.default_rng(0)))
        for k, name in enumerate(names):
            dev = 0.0
            for t in range(1000):
                rng = draws(5, k)(t)
                fmap, src, dst = _isometry_families(rng)[name]
                w = _ball_point(rng) if src == "ball" else _hs_point(rng)
                dev = max(dev, abs(pullback_ratio(fmap, w, rng.normal(size=4), src, dst) - 1.0))
            worst[name] = dev
        m = MoebiusMap(0.5 * I, ONE)
        witness = (0.0, None)
        for t in range(1000):
            rng = draws(5, 99)(t)
            w, d = _ball_point(rng, 0.9), rng.normal(size=4)
            dev = abs(pullback_ratio(m, w, d) - 1.0)
            if dev > witness[0]:
                witness = (dev, w)
    iso = max(worst.values())
    passed = iso <= 1e-6 and witness[0] > 0.01
    assert record(5, "isometries and non-invariance", passed,
                  f"max |ratio - 1| {iso:.2e} <= 1e-6 over {len(worst)} families x 1000; "
                  f"M_(i/2) distortion {witness[0]:.3f} > 0.01 at {np.round(witness[1], 4).tolist()}",
                  clock.elapsed, 30)


def test_06_geodesics():
    with Timer() as clock:
        drift = 0.0
        for t in range(20):
            rng = draws(6, 0)(t)
            init = SurfaceState.unit_speed(rng.uniform(0.2, 1.5), 0.0, rng.uniform(0.05, math.pi - 0.05))
            trace = surface_geodesic(init, 20.0)
            drift = max(drift, max(abs(s.A - init.A) for s in trace) / 20.0,
                        max(abs(s.energy - init.energy) for s in trace) / 20.0)
        slices = locus = circle = radial = agree = 0.0
        for t in range(10):
            rng = draws(6, 1)(t)
            unit = _unit_imag(rng)
            z, v = rng.normal(size=2) * 0.3, rng.normal(size=2)
            tr = cartesian_geodesic(z[0] * ONE + z[1] * unit, v[0] * ONE + v[1] * unit, 4.0)
            off = tr.points[:, 1:] - np.outer(tr.points[:, 1:] @ unit[1:], unit[1:])
            slices = max(slices, float(np.max(np.abs(off))))
            v = rng.normal(size=4)
            v[0] = 0.0
            tr = cartesian_geodesic(0.5 * rng.random() * _unit_imag(rng), v, 4.0)
            locus = max(locus, float(np.max(np.abs(tr.points[:, 0]))))
            w = _ball_point(rng, 0.6)
            tr = cartesian_geodesic(w, rng.normal(size=4), 4.0)
            u = w[1:] / np.linalg.norm(w[1:])
            normal = np.cross(u, tr.velocities[0, 1:])
            normal /= np.linalg.norm(normal)
            units = tr.points[:, 1:] / np.linalg.norm(tr.points[:, 1:], axis=1)[:, None]
            circle = max(circle, float(np.max(np.abs(units @ normal))))
            tr = cartesian_geodesic(ZERO, rng.normal(size=4), 3.0)
            radial = max(radial, float(np.max(np.abs(np.arctanh(np.linalg.norm(tr.points, axis=1)) - tr.s))))
            x0 = rng.uniform(-0.6, 0.6)
            tr = cartesian_geodesic(x0 * ONE, ONE, 2.0)
            radial = max(radial, float(np.max(np.abs(np.arctanh(tr.points[:, 0]) - math.atanh(x0) - tr.s))))
            init = SurfaceState.unit_speed(rng.uniform(0.3, 1.0), rng.uniform(0, 2 * math.pi),
                                           rng.uniform(0.3, math.pi - 0.3))
            e1 = _unit_imag(rng)
            e2 = _unit_imag(rng)
            e2 = e2 - (e2 @ e1) * e1
            e2 /= np.linalg.norm(e2)
            surf = surface_geodesic(init, 5.0, samples=51)
            w0, v0 = surface_to_cartesian(init, e1, e2)
            tr = cartesian_geodesic(w0, v0, 5.0, samples=51, rtol=1e-11, atol=1e-13)
            expected = np.array([surface_to_cartesian(s, e1, e2)[0] for s in surf])
            agree = max(agree, float(np.max(np.abs(tr.points - expected))))
    passed = drift <= 1e-8 and max(slices, locus, circle, radial, agree) <= 1e-6
    assert record(6, "geodesic conservation and geometry", passed,
                  f"surface drift per length {drift:.1e} <= 1e-8; slice {slices:.1e}, Re = 0 locus "
                  f"{locus:.1e}, great circle {circle:.1e}, radial {radial:.1e}, integrators "
                  f"{agree:.1e} <= 1e-6", clock.elapsed, 60)


def test_07_orthogonal_slice_limit():
    r = 0.999
    with Timer() as clock:
        length = curve_length(polyline_relax(r * I, r * J, n=64))
    target = 0.5 * (math.pi / 2)
    err = abs(length - target) / target
    assert record(7, "limit distance between orthogonal slices", err <= 0.02,
                  f"relaxed length {length:.6f} vs pi/4 = {target:.6f}, relative error {err:.1e} <= 2e-2 "
                  f"at r = {r}", clock.elapsed, 30)


def test_08_bilateral_estimate():
    with Timer() as clock:
        order = up = low = 0.0
        for t in range(1000):
            rng = draws(8, 0)(t)
            q1, q2 = _ball_point(rng), _ball_point(rng)
            b = distance_bounds(q1, q2)
            s = bilateral_quantity(q1, q2)
            order = max(order, b.lower - b.upper)
            up = max(up, b.upper / s)
            low = max(low, s / b.lower if b.lower > 0 else (math.inf if s > 0 else 1.0))
    passed = order <= 0.0 and up <= 50 and low <= 50
    assert record(8, "bilateral estimate", passed,
                  f"max(lower - upper) = {order:.1e} <= 0; max upper/S = {up:.6f}, max S/lower = "
                  f"{low:.3f} (finite, <= 50; 1000 pairs, margin 0.05)", clock.elapsed, 60)


def test_09_boundary_integral_constants():
    with Timer() as clock:
        sphere, serr = sphere_ratios()
        half, herr = halfspace_ratios()
    s_mean, h_mean = float(np.mean(sphere)), float(np.mean(half))
    s_spread = float(np.ptp(sphere)) / s_mean
    h_spread = float(np.ptp(half)) / h_mean
    s_flag = abs(s_mean - math.pi / 2) > 1e-3 * s_mean
    h_flag = abs(h_mean - math.pi ** 2) > 1e-3 * h_mean
    passed = (s_spread <= 1e-3 and h_spread <= 1e-3
              and abs(s_mean - SPHERE_CONSTANT) <= 1e-3 * SPHERE_CONSTANT
              and abs(h_mean - HALFSPACE_CONSTANT) <= 1e-3 * HALFSPACE_CONSTANT
              and s_flag and h_flag)
    assert record(9, "boundary-integral constants", passed,
                  f"sphere ratio {s_mean:.8f} (pi^2 = {math.pi ** 2:.8f}) spread {s_spread:.1e}, "
                  f"refinement <= {max(serr):.0e}; half-space ratio {h_mean:.8f} (pi^2/2 = "
                  f"{math.pi ** 2 / 2:.8f}) spread {h_spread:.1e}, refinement <= {max(herr):.0e}; "
                  f"stated pi/2 and pi^2 flagged as convention discrepancies: {s_flag and h_flag}",
                  clock.elapsed, 60)


def test_10_donatini_rescaling():
    with Timer() as clock:
        worst = 0.0
        for t in range(1000):
            rng = draws(10, 0)(t)
            lhs, rhs = donatini_rescaling_check(_hs_point(rng), _hs_point(rng))
            worst = max(worst, float(norm(lhs - rhs)))
    assert record(10, "Cayley rescaling of kernels", worst <= 1e-10,
                  f"max |lhs - rhs| {worst:.2e} <= 1e-10 (1000 half-space pairs)", clock.elapsed, 5)


def test_11_contraction():
    square, cube = RegularSeries.monomial(2), RegularSeries.monomial(3)
    with Timer() as clock:
        worst = {}
        for k, name in enumerate(("q^2", "q^3", "M_lambda", "M_lambda q^2")):
            dev = -math.inf
            for t in range(1000):
                rng = draws(11, k)(t)
                m = MoebiusMap(rng.uniform(-0.9, 0.9) * ONE, ONE)
                fmap = {"q^2": square, "q^3": cube, "M_lambda": m,
                        "M_lambda q^2": lambda q, m=m: mul(m(q), square(q))}[name]
                dev = max(dev, pullback_ratio(fmap, _ball_point(rng), rng.normal(size=4)) - 1.0)
            worst[name] = dev
        m = MoebiusMap(0.5 * I, ONE)
        expand = max(pullback_ratio(m, _ball_point(rng, 0.9), rng.normal(size=4))
                     for rng in (draws(11, 9)(t) for t in range(1000)))
    contraction = max(worst.values())
    passed = contraction <= 1e-8 and expand > 1.01
    assert record(11, "contraction of slice-preserving maps", passed,
                  f"max (ratio - 1) {contraction:.1e} <= 1e-8 over q^2, q^3, M_lambda, M_lambda q^2 "
                  f"(1000 points each); M_(i/2) max ratio {expand:.3f} > 1.01", clock.elapsed, 20)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
