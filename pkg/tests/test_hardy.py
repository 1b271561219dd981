import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from qhgeo.errors import DomainViolation, NegativeCoefficient, QuadratureNotConverged
from qhgeo.hardy import (ExponentialDensity, KernelNorms, PolyExpDensity, SampledDensity,
                         delta, donatini_rescaling_check, halfspace_boundary_integral,
                         hardy_norm2, inner_product, kernel_norms, kernel_norms_series,
                         laplace_eval, rkhs_metric_coefficients, sphere_boundary_integral,
                         sphere_limit_norm)
from qhgeo.quadrature import composite_gauss_legendre, gauss_legendre, graded_breaks, sphere_rule
from qhgeo.quat import I, J, K, ONE, ZERO, mul, norm, norm2, quat
from qhgeo.series import RegularSeries, eval_series, kernel_ball_series, kernel_halfspace

from conftest import from_complex, random_ball_point, random_unit_imag


class TestQuadratureRules:
    def test_gauss_legendre_polynomial(self):
        x, w = gauss_legendre(5, 0.0, 2.0)
        assert w @ x ** 9 == pytest.approx(2 ** 10 / 10)

    def test_composite(self):
        x, w = composite_gauss_legendre(graded_breaks(0.0, math.pi, 1e-3), 8)
        assert w @ np.sin(x) == pytest.approx(2.0, rel=1e-14)

    def test_sphere_rule(self):
        units, w = sphere_rule(7)
        assert units.shape == (26, 4) and w.sum() == pytest.approx(4 * math.pi)
        assert_allclose(norm(units), 1.0)
        assert w @ units[:, 3] ** 2 == pytest.approx(4 * math.pi / 3)


class TestInnerProduct:
    def test_all_ones(self):
        f = RegularSeries(np.tile(ONE, (6, 1)))
        assert_allclose(inner_product(f, f), 6 * ONE)

    def test_single_term(self):
        assert_allclose(inner_product(RegularSeries([ZERO, I]), RegularSeries([ZERO, J])), K)

    def test_reproducing(self, rng):
        for _ in range(20):
            f = RegularSeries(rng.normal(size=(21, 4)))
            w = random_ball_point(rng, 0.9)
            N = 200
            err = norm(inner_product(f, kernel_ball_series(w, N)) - eval_series(f, w))
            assert err <= 1e-12 * (1 + norm(eval_series(f, w)))

    def test_norm(self, rng):
        f = RegularSeries(rng.normal(size=(4, 4)))
        assert inner_product(f, f)[0] == pytest.approx(hardy_norm2(f))
        assert_allclose(inner_product(f, f)[1:], 0, atol=1e-14)


class TestDelta:
    def test_origin(self, rng):
        for _ in range(100):
            w = random_ball_point(rng, 0.99)
            assert delta(ZERO, w) == norm(w)

    def test_same_point(self, rng):
        w = random_ball_point(rng)
        assert delta(w, w) < 1e-15
        assert delta(w, w, "kernel") < 1e-7

    def test_real_axis(self):
        assert delta(0.5 * ONE, 0.25 * ONE) == pytest.approx(2 / 7, rel=1e-15)
        assert delta(0.5 * ONE, 0.25 * ONE, "kernel") == pytest.approx(2 / 7, rel=1e-14)

    def test_same_slice_complex(self, rng):
        u = random_unit_imag(rng)
        a, b = 0.3 + 0.5j, -0.6 + 0.1j
        expect = abs((b - a) / (1 - np.conj(a) * b))
        assert delta(from_complex(a, u), from_complex(b, u)) == pytest.approx(expect, rel=1e-14)

    def test_routes_agree_symmetric(self, rng):
        for _ in range(500):
            w, z = random_ball_point(rng, 0.95), random_ball_point(rng, 0.95)
            d = delta(w, z)
            assert abs(delta(w, z, "kernel") - d) <= 1e-12
            assert abs(delta(z, w) - d) <= 1e-12

    def test_domain(self):
        with pytest.raises(DomainViolation):
            delta(ONE, ZERO)
        with pytest.raises(ValueError):
            delta(ZERO, ZERO, "bogus")


class TestKernelNorms:
    def test_origin(self):
        assert kernel_norms(ZERO) == KernelNorms(1.0, 1.0, 1.0, 0.0, 0.0)
        assert rkhs_metric_coefficients(kernel_norms(ZERO)) == (1.0, 1.0)

    def test_real_half(self):
        n = kernel_norms(0.5 * ONE)
        assert n.kNorm2 == pytest.approx(4 / 3)
        assert_allclose(rkhs_metric_coefficients(n), (16 / 9, 16 / 9), rtol=1e-12)

    def test_j_half(self):
        assert rkhs_metric_coefficients(kernel_norms(J / 2))[1] == pytest.approx(16 / 25, rel=1e-13)

    @given(st.integers(0, 2**32))
    def test_series_oracle(self, seed):
        rng = np.random.default_rng(seed)
        w = random_ball_point(rng, 0.8)
        a, b = kernel_norms(w), kernel_norms_series(w, 400)
        for name in KernelNorms.__dataclass_fields__:
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-8, abs=1e-12)

    def test_series_oracle_real_point(self):
        a, b = kernel_norms(0.6 * ONE), kernel_norms_series(0.6 * ONE, 400)
        for name in KernelNorms.__dataclass_fields__:
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-10)

    def test_branch_switch_agreement(self):
        # both sides of the |Im w| = 1e-4 switch agree to 1e-6 relative
        for x in (0.0, 0.3, -0.7):
            below = kernel_norms(quat(x, 0.99e-4)).dsNorm2
            above = kernel_norms(quat(x, 1.01e-4)).dsNorm2
            assert above == pytest.approx(below, rel=1e-6)

    def test_stable_ds_formula(self, rng):
        for _ in range(50):
            w = random_ball_point(rng, 0.95)
            a = norm2(w)
            m = norm2(ONE - mul(w, w))
            assert kernel_norms(w).dsNorm2 == pytest.approx((1 + a) / ((1 - a) * m), rel=1e-7)

    def test_cauchy_schwarz(self, rng):
        for _ in range(50):
            n = kernel_norms(random_ball_point(rng, 0.99))
            assert n.dcAtW2 <= n.kNorm2 * n.dcNorm2
            assert n.dsAtW2 <= n.kNorm2 * n.dsNorm2

    def test_metric_coefficients_closed_form(self, rng):
        for _ in range(50):
            w = random_ball_point(rng, 0.9)
            c1, c2 = rkhs_metric_coefficients(kernel_norms(w))
            assert c1 == pytest.approx(1 / (1 - norm2(w)) ** 2, rel=1e-10)
            assert c2 == pytest.approx(1 / norm2(ONE - mul(w, w)), rel=1e-6)

    def test_negative_coefficient(self):
        with pytest.raises(NegativeCoefficient):
            rkhs_metric_coefficients(KernelNorms(1.0, 1.0, 1.0, 2.0, 0.0))

    def test_domain(self):
        with pytest.raises(DomainViolation):
            kernel_norms(ONE)


TEST_POLYS = [
    RegularSeries([ONE]),
    RegularSeries([ZERO, ONE]),
    RegularSeries([ZERO, ZERO, ONE]),
    RegularSeries([quat(1, 2, 0, -1), quat(0.5, 0, 1, 0.3)]),
    RegularSeries([quat(0.2, 0, 0, 1), quat(0, 1, 0, 0), quat(0, 0, -0.5, 0), quat(1, 1, 1, 1)]),
]


class TestSphereIntegrals:
    def test_constant(self):
        assert sphere_boundary_integral(TEST_POLYS[0]).value == pytest.approx(math.pi ** 2, rel=1e-12)

    def test_identity(self):
        assert sphere_boundary_integral(TEST_POLYS[1]).value == pytest.approx(math.pi ** 2, rel=1e-12)

    def test_linear(self):
        a0, a1 = quat(1, 2, 0, -1), quat(0.5, 0, 1, 0.3)
        expect = math.pi ** 2 * (norm2(a0) + norm2(a1))
        assert sphere_boundary_integral(TEST_POLYS[3]).value == pytest.approx(expect, rel=1e-12)

    def test_ratio_constant(self):
        ratios = [sphere_boundary_integral(f).value / hardy_norm2(f) for f in TEST_POLYS]
        assert np.ptp(ratios) / np.mean(ratios) <= 1e-3
        assert np.mean(ratios) == pytest.approx(math.pi ** 2, rel=1e-10)

    def test_not_converged(self):
        f = RegularSeries(np.tile(ONE, (200, 1)))
        with pytest.raises(QuadratureNotConverged) as exc:
            sphere_boundary_integral(f, levels=((8, 3), (9, 3)), escalate=False)
        assert exc.value.refinement_error > 1e-6

    def test_limit_zero(self):
        assert sphere_limit_norm(RegularSeries([ZERO]), 0.9).value == 0.0

    def test_limit_independent_of_f(self):
        r = 0.9999
        ratios = [sphere_limit_norm(f, r).value / hardy_norm2(f) for f in TEST_POLYS[:4]]
        assert np.ptp(ratios) / np.mean(ratios) <= 1e-3

    def test_limit_normalization(self):
        # for |f| constant on spheres the average is |f|^2 itself
        assert sphere_limit_norm(TEST_POLYS[0], 0.99).value == pytest.approx(1 - 0.99 ** 2, rel=1e-10)

    def test_limit_domain(self):
        with pytest.raises(DomainViolation):
            sphere_limit_norm(TEST_POLYS[0], 1.0)


DENSITIES = [
    PolyExpDensity(1.0),
    PolyExpDensity(2.0),
    PolyExpDensity(1.0, np.array([[1, 0, 0, 0], [0, 1, 1, 0.0]])),
    PolyExpDensity(0.7, np.array([[0, 0, 1, 0], [0.3, 0, 0, 0], [0, 0.2, 0, 0.1]])),
    ExponentialDensity(quat(1.5, 0.5, 0.2, 0), quat(1, 1, 0, 0)),
]


class TestLaplace:
    def test_exponential_at_one(self):
        assert_allclose(laplace_eval(PolyExpDensity(1.0), ONE), 0.5 * ONE, atol=1e-13)

    def test_real_points(self):
        for x in (0.1, 0.5, 3.0):
            assert_allclose(laplace_eval(PolyExpDensity(1.0), x * ONE), ONE / (x + 1), atol=1e-12)

    def test_matches_kernel(self):
        assert_allclose(laplace_eval(PolyExpDensity(2.0), ONE + I), kernel_halfspace(2 * ONE, ONE + I),
                        atol=1e-12)

    def test_exponential_family_matches_kernel(self, rng):
        for _ in range(10):
            w = quat(rng.uniform(0.2, 2), *rng.normal(size=3))
            q = quat(rng.uniform(0.05, 2), *rng.normal(size=3))
            F = ExponentialDensity(w)
            assert_allclose(laplace_eval(F, q), kernel_halfspace(w, q), atol=1e-8)

    @pytest.mark.parametrize("F", DENSITIES)
    def test_closed_forms(self, F, rng):
        q = quat(rng.uniform(0.05, 2), *rng.normal(size=3))
        assert_allclose(laplace_eval(F, q), F.closed_form(q), atol=1e-10)

    def test_norms(self):
        assert PolyExpDensity(1.0).norm2() == pytest.approx(0.5)
        assert PolyExpDensity(2.0).norm2() == pytest.approx(0.25)
        for F in DENSITIES:
            z, w = composite_gauss_legendre(np.linspace(0, 80, 81), 20)
            assert F.norm2() == pytest.approx(w @ norm2(F.values(z)), rel=1e-12)

    def test_sampled(self):
        z, w = composite_gauss_legendre(np.linspace(0, 60, 121), 16)
        F = SampledDensity(z, PolyExpDensity(1.0).values(z), w)
        assert F.norm2() == pytest.approx(0.5, rel=1e-12)
        assert_allclose(laplace_eval(F, ONE + I), kernel_halfspace(ONE, ONE + I), atol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainViolation):
            laplace_eval(PolyExpDensity(1.0), -ONE)
        with pytest.raises(DomainViolation):
            PolyExpDensity(-1.0)


class TestHalfspaceBoundary:
    def test_exponential(self):
        assert halfspace_boundary_integral(PolyExpDensity(1.0)).value == pytest.approx(math.pi ** 2 / 4, rel=1e-5)

    def test_exponential_two(self):
        assert halfspace_boundary_integral(PolyExpDensity(2.0)).value == pytest.approx(math.pi ** 2 / 8, rel=1e-5)

    def test_ratio_constant(self):
        ratios = [halfspace_boundary_integral(F).value / F.norm2() for F in DENSITIES]
        assert np.ptp(ratios) / np.mean(ratios) <= 1e-3
        assert np.mean(ratios) == pytest.approx(math.pi ** 2 / 2, rel=1e-4)

    def test_sampled_density_rejected(self):
        z, w = composite_gauss_legendre(np.linspace(0, 50, 101), 12)
        with pytest.raises(ValueError):
            halfspace_boundary_integral(SampledDensity(z, PolyExpDensity(1.0).values(z), w))

    def test_reports_refinement(self):
        b = halfspace_boundary_integral(PolyExpDensity(1.0))
        assert 0 <= b.refinement_error <= 1e-6


class TestDonatini:
    def test_unit(self):
        lhs, rhs = donatini_rescaling_check(ONE, ONE)
        assert_allclose(lhs, ONE, atol=1e-15)
        assert_allclose(rhs, ONE, atol=1e-15)

    def test_real(self):
        lhs, rhs = donatini_rescaling_check(ONE, 2 * ONE)
        assert_allclose(lhs, ONE, atol=1e-15)  # C^-1(1) = 0 and k_0 = 1
        assert_allclose(rhs, lhs, atol=1e-15)

    @given(st.integers(0, 2**32))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        w = quat(rng.uniform(0.01, 3), *rng.uniform(-2, 2, 3))
        z = quat(rng.uniform(0.01, 3), *rng.uniform(-2, 2, 3))
        lhs, rhs = donatini_rescaling_check(w, z)
        assert norm(lhs - rhs) <= 1e-10 * (1 + norm(lhs))

    def test_domain(self):
        with pytest.raises(DomainViolation):
            donatini_rescaling_check(-ONE, ONE)
