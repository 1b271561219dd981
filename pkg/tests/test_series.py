import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from qhgeo.errors import (DegreeOverflow, DomainViolation, NonInvertible, SingularAt,
                          ZeroAtPoint)
from qhgeo.quat import I, J, K, ONE, ZERO, conj, inv, mul, norm, quat
from qhgeo.series import (MoebiusMap, RegularSeries, T_f, cayley, cayley_inv, conj_series,
                          eval_series, kernel_ball, kernel_ball_series,
                          kernel_ball_tail_bound, kernel_halfspace, kernel_halfspace_series,
                          moebius_eval, regular_quotient, representation_formula,
                          slice_derivative, spherical_derivative, star_inverse, star_mul,
                          star_pointwise_identity, symmetrization)

from conftest import from_complex, random_ball_point, random_unit_imag

quats = st.lists(st.floats(-2, 2), min_size=4, max_size=4).map(np.array)


def series(*cs):
    return RegularSeries(np.array([np.asarray(c, dtype=float) * (ONE if np.isscalar(c) else 1) for c in cs]))


def rand_series(rng, deg):
    return RegularSeries(rng.normal(size=(deg + 1, 4)))


class TestConstruction:
    def test_trailing_zeros_trimmed(self):
        f = RegularSeries([ONE, I, ZERO, ZERO])
        assert f.degree == 1

    def test_zero_series(self):
        assert RegularSeries([ZERO, ZERO]).degree == 0

    def test_cap(self):
        with pytest.raises(DegreeOverflow):
            RegularSeries(np.ones((10, 4)), cap=5)
        with pytest.raises(DegreeOverflow):
            star_mul(RegularSeries(np.ones((4, 4)), cap=5), RegularSeries(np.ones((4, 4)), cap=5))

    def test_json_roundtrip(self):
        f = RegularSeries([ONE, I + J])
        assert np.array_equal(RegularSeries.from_json(f.to_json()).coeffs, f.coeffs)

    def test_coeffs_read_only(self):
        with pytest.raises(ValueError):
            RegularSeries([ONE]).coeffs[0, 0] = 2.0


class TestEval:
    def test_linear(self):
        assert_allclose(eval_series(series(1, I), J), ONE - K)

    def test_square(self):
        assert_allclose(eval_series(RegularSeries.monomial(2), J / 2), -0.25 * ONE)

    def test_at_zero(self, rng):
        f = rand_series(rng, 5)
        assert_allclose(eval_series(f, ZERO), f.coeffs[0])

    def test_batch(self, rng):
        f = rand_series(rng, 6)
        pts = rng.normal(size=(7, 4)) * 0.4
        assert_allclose(eval_series(f, pts), np.stack([eval_series(f, p) for p in pts]))

    def test_splitting_on_slice(self, rng):
        # with a_n = F_n + G_n J (F_n, G_n in L_I, J orthogonal to I), f(z) = F(z) + G(z) J on L_I
        unit = I
        f = rand_series(rng, 5)
        Fc = np.array([complex(a[0], a[1]) for a in f.coeffs])
        Gc = np.array([complex(a[2], a[3]) for a in f.coeffs])
        z = 0.3 - 0.5j
        F = np.polyval(Fc[::-1], z)
        G = np.polyval(Gc[::-1], z)
        assert_allclose(eval_series(f, from_complex(z, unit)), [F.real, F.imag, G.real, G.imag], atol=1e-13)


class TestStarProduct:
    def test_example_one(self):
        h = star_mul(series(1, -I), series(1, -J))
        assert_allclose(h.coeffs, [ONE, -(I + J), K])

    def test_identity(self, rng):
        f = rand_series(rng, 4)
        assert_allclose(star_mul(f, series(1)).coeffs, f.coeffs)

    def test_example_three(self):
        h = star_mul(series(-I, 1), series(-J, 1))
        assert_allclose(h.coeffs, [K, -(I + J), ONE])

    def test_associativity(self, rng):
        for _ in range(50):
            f, g, h = (rand_series(rng, rng.integers(0, 9)) for _ in range(3))
            a = star_mul(star_mul(f, g), h).coeffs
            b = star_mul(f, star_mul(g, h)).coeffs
            assert np.max(np.abs(a - b)) <= 1e-12 * (1 + np.max(np.abs(a)))

    def test_not_pointwise(self):
        q = quat(0.1, 0.2, 0.3, 0.1)
        f, g = series(-I, 1), series(-J, 1)
        assert norm(eval_series(star_mul(f, g), q) - mul(eval_series(f, q), eval_series(g, q))) > 1e-3

    def test_pointwise_identity_example(self):
        lhs, rhs = star_pointwise_identity(series(-I, 1), series(-J, 1), J)
        f_j = J - I
        oracle = mul(f_j, mul(inv(f_j), mul(J, f_j)) - J)
        assert_allclose(rhs, oracle, atol=1e-15)
        assert_allclose(lhs, rhs, atol=1e-15)

    def test_pointwise_identity_constant_f(self, rng):
        g = rand_series(rng, 4)
        q = random_ball_point(rng)
        lhs, rhs = star_pointwise_identity(series(1), g, q)
        assert_allclose(rhs, eval_series(g, q), atol=1e-14)

    def test_zero_at_point(self):
        # f = q - i vanishes at i; then f*g(i) = 0
        with pytest.raises(ZeroAtPoint) as exc:
            star_pointwise_identity(series(-I, 1), series(-J, 1), I)
        assert_allclose(exc.value.lhs, ZERO, atol=1e-15)

    @given(st.integers(0, 2**32))
    def test_pointwise_identity_random(self, seed):
        rng = np.random.default_rng(seed)
        f, g = rand_series(rng, 4), rand_series(rng, 4)
        lhs, rhs = star_pointwise_identity(f, g, random_ball_point(rng))
        assert norm(lhs - rhs) <= 1e-12 * (1 + norm(lhs))


class TestConjugates:
    def test_example(self):
        f = RegularSeries([ONE, -conj(I / 2)])
        assert_allclose(symmetrization(f).coeffs, [ONE, ZERO, 0.25 * ONE], atol=1e-16)

    def test_real_coefficients(self):
        f = RegularSeries.from_real([1, 2, 3])
        assert_allclose(conj_series(f).coeffs, f.coeffs)

    def test_conj(self):
        assert_allclose(conj_series(series(I, J)).coeffs, [-I, -J])

    @given(st.integers(0, 2**32), st.integers(0, 10))
    def test_symmetrization_real(self, seed, deg):
        f = rand_series(np.random.default_rng(seed), deg)
        c = symmetrization(f).coeffs
        assert np.max(np.abs(c[:, 1:])) <= 1e-13 * np.max(np.abs(f.coeffs)) ** 2 * (deg + 1)


class TestStarInverse:
    def test_example(self):
        h = star_inverse(series(1, -I), 4)
        assert_allclose(h.coeffs, [ONE, I, -ONE, -I, ONE], atol=1e-15)

    def test_constant(self):
        c = quat(1, 2, -1, 0.5)
        assert_allclose(star_inverse(RegularSeries([c]), 3).coeffs, [inv(c)], atol=1e-15)

    def test_noninvertible(self):
        with pytest.raises(NonInvertible):
            star_inverse(RegularSeries.monomial(1), 4)

    @given(st.integers(0, 2**32), st.integers(0, 6), st.integers(1, 30))
    def test_contract(self, seed, deg, M):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=(deg + 1, 4)) * 0.3
        c[0] = ONE + 0.2 * rng.normal(size=4)
        # keep f zero-free on a neighbourhood of the closed disc: |c_0| > sum |c_n|
        tail = np.linalg.norm(c[1:], axis=1).sum()
        if tail > 0:
            c[1:] *= min(1.0, 0.9 * np.linalg.norm(c[0]) / tail)
        f = RegularSeries(c)
        prod = star_mul(f, star_inverse(f, M), cap=1000).coeffs
        res = np.zeros_like(prod[: M + 1])
        res[: min(len(prod), M + 1)] = prod[: M + 1]
        res[0] -= ONE
        assert np.max(np.abs(res)) <= 1e-11

    @given(st.integers(0, 2**32), st.integers(0, 6), st.integers(1, 30))
    def test_contract_relative(self, seed, deg, M):
        # zeros inside the disc make the inverse coefficients grow geometrically;
        # the residual then stays small relative to their size
        rng = np.random.default_rng(seed)
        c = rng.normal(size=(deg + 1, 4)) * 0.3
        c[0] = ONE + 0.2 * rng.normal(size=4)
        f = RegularSeries(c)
        g = star_inverse(f, M)
        prod = star_mul(f, g, cap=1000).coeffs
        res = np.zeros_like(prod[: M + 1])
        res[: min(len(prod), M + 1)] = prod[: M + 1]
        res[0] -= ONE
        scale = np.abs(c).max() * np.abs(g.coeffs).max()
        assert np.max(np.abs(res)) <= 1e-13 * max(scale, 1.0)

    def test_left_inverse_too(self, rng):
        f = RegularSeries([ONE, 0.4 * I + 0.2 * J, 0.1 * K])
        prod = star_mul(star_inverse(f, 20), f, cap=100).coeffs[:21].copy()
        prod[0] -= ONE
        assert np.max(np.abs(prod)) < 1e-12


class TestQuotient:
    def test_T_f_example(self):
        assert_allclose(T_f(series(1, -I), J), -I, atol=1e-15)

    def test_T_f_hand_value(self):
        # (1 - k/2)^-1 (j/2)(1 - k/2) = -0.4 i + 0.3 j
        assert_allclose(T_f(series(1, -I), J / 2), quat(0, -0.4, 0.3, 0), atol=1e-15)

    def test_T_f_real(self, rng):
        f = rand_series(rng, 3)
        assert_allclose(T_f(f, 0.4 * ONE), 0.4 * ONE, atol=1e-15)

    def test_quotient_identity_f(self, rng):
        g = rand_series(rng, 3)
        q = random_ball_point(rng)
        assert_allclose(regular_quotient(series(1), g, q), eval_series(g, q), atol=1e-14)

    def test_quotient_singular(self):
        with pytest.raises(SingularAt):
            regular_quotient(series(1, -I), series(1), J)

    def test_quotient_matches_series_inverse(self, rng):
        f = RegularSeries([ONE, 0.3 * I - 0.2 * K])
        g = rand_series(rng, 2)
        q = random_ball_point(rng, 0.8)
        h = star_mul(star_inverse(f, 80), g, cap=200)
        assert_allclose(regular_quotient(f, g, q), eval_series(h, q), atol=1e-12)


class TestDerivatives:
    def test_slice(self):
        assert_allclose(slice_derivative(RegularSeries.monomial(2)).coeffs, [ZERO, 2 * ONE])
        assert_allclose(slice_derivative(series(quat(1, 2, 3, 4))).coeffs, [ZERO])

    def test_slice_of_kernel(self):
        w = quat(0.1, 0.2, -0.3, 0.1)
        k = kernel_ball_series(w, 10)
        d = slice_derivative(k)
        for n in range(1, 11):
            assert_allclose(d.coeffs[n - 1], n * k.coeffs[n])

    def test_spherical_real_point(self):
        assert_allclose(spherical_derivative(RegularSeries.monomial(3), 0.5 * ONE), 0.75 * ONE)

    def test_spherical_square(self):
        q = quat(0.3, 0.1, 0.2, -0.4)
        assert_allclose(spherical_derivative(RegularSeries.monomial(2), q), 0.6 * ONE, atol=1e-15)

    def test_spherical_identity(self, rng):
        q = random_ball_point(rng)
        assert_allclose(spherical_derivative(RegularSeries.monomial(1), q), ONE, atol=1e-15)


class TestRepresentationFormula:
    def test_same_unit(self, rng):
        f = rand_series(rng, 4)
        u = random_unit_imag(rng)
        assert_allclose(representation_formula(f, 0.2, 0.3, u, u), eval_series(f, 0.2 * ONE + 0.3 * u),
                        atol=1e-14)

    def test_real(self, rng):
        f = rand_series(rng, 4)
        assert_allclose(representation_formula(f, 0.2, 0.0, I, J), eval_series(f, 0.2 * ONE), atol=1e-14)

    def test_linear(self, rng):
        a = rng.normal(size=4)
        u1, u2 = random_unit_imag(rng), random_unit_imag(rng)
        assert_allclose(representation_formula(RegularSeries([ZERO, a]), 0.4, -0.7, u1, u2),
                        mul(0.4 * ONE - 0.7 * u2, a), atol=1e-14)

    @given(st.integers(0, 2**32))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        f = rand_series(rng, 6)
        x, y = rng.normal(size=2) * 0.6
        u1, u2 = random_unit_imag(rng), random_unit_imag(rng)
        direct = eval_series(f, x * ONE + y * u2)
        assert norm(representation_formula(f, x, y, u1, u2) - direct) <= 1e-12 * (1 + norm(direct))


class TestMoebius:
    def test_closed_form_matches_quotient_route(self, rng):
        for _ in range(200):
            m = MoebiusMap(random_ball_point(rng, 0.95), ONE)
            q = random_ball_point(rng, 0.95)
            assert_allclose(moebius_eval(m, q), regular_quotient(m.denominator, m.numerator, q), atol=1e-14)

    def test_identity(self, rng):
        q = random_ball_point(rng)
        assert_allclose(moebius_eval(MoebiusMap(ZERO), q), q, atol=1e-15)

    def test_same_slice(self, rng):
        u = random_unit_imag(rng)
        a, z = 0.3 - 0.2j, -0.1 + 0.6j
        m = MoebiusMap(from_complex(a, u))
        assert_allclose(moebius_eval(m, from_complex(z, u)),
                        from_complex((z - a) / (1 - np.conj(a) * z), u), atol=1e-15)

    def test_real_parameter(self):
        m = MoebiusMap(0.5 * ONE)
        assert_allclose(moebius_eval(m, 0.2 * ONE), (0.2 - 0.5) / (1 - 0.1) * ONE, atol=1e-15)

    def test_composition(self, rng):
        lam = 0.6
        mp, mm = MoebiusMap(lam * ONE), MoebiusMap(-lam * ONE)
        for _ in range(100):
            q = random_ball_point(rng, 0.95)
            assert_allclose(moebius_eval(mp, moebius_eval(mm, q)), q, atol=1e-11)

    def test_maps_ball_to_ball(self, rng):
        m = MoebiusMap(quat(0.2, 0.3, -0.4, 0.1), u=quat(0, 0.6, 0.8, 0))
        for _ in range(50):
            assert norm(moebius_eval(m, random_ball_point(rng, 0.99))) < 1

    def test_validation(self):
        with pytest.raises(DomainViolation):
            MoebiusMap(ONE)
        with pytest.raises(DomainViolation):
            MoebiusMap(ZERO, u=2 * ONE)
        with pytest.raises(DomainViolation):
            moebius_eval(MoebiusMap(ZERO), ONE)


class TestKernels:
    def test_ball_origin(self, rng):
        assert_allclose(kernel_ball(ZERO, random_ball_point(rng)), ONE)

    def test_ball_example(self):
        assert_allclose(kernel_ball(I / 2, J / 2), quat(16 / 15, 0, 0, 4 / 15), atol=1e-15)
        assert_allclose(eval_series(kernel_ball_series(I / 2, 200), J / 2), quat(16 / 15, 0, 0, 4 / 15),
                        atol=1e-15)

    def test_ball_real(self):
        assert_allclose(kernel_ball(0.5 * ONE, 0.3 * ONE), ONE / (1 - 0.15))

    def test_ball_series_coefficients_are_powers(self, rng):
        for w in (random_ball_point(rng), 0.4 * ONE, quat(0.3, 1e-14, 0, 0)):
            c = kernel_ball_series(w, 30).coeffs
            p = ONE
            for n in range(31):
                assert_allclose(c[n], p, atol=1e-15)
                p = mul(p, conj(w))

    def test_ball_domain(self):
        with pytest.raises(DomainViolation):
            kernel_ball(ONE, ONE)

    def test_ball_series_tail(self, rng):
        for _ in range(20):
            w, q = random_ball_point(rng, 0.95), random_ball_point(rng, 0.95)
            N = 40
            err = norm(kernel_ball(w, q) - eval_series(kernel_ball_series(w, N), q))
            assert err <= kernel_ball_tail_bound(norm(q) * norm(w), N) * (1 + 1e-9) + 1e-15

    def test_ball_slice_preserving(self, rng):
        u = random_unit_imag(rng)
        k = kernel_ball(from_complex(0.3 + 0.4j, u), from_complex(-0.2 + 0.5j, u))
        z = 1 / (1 - (-0.2 + 0.5j) * np.conj(0.3 + 0.4j))
        assert_allclose(k, from_complex(z, u), atol=1e-13)

    def test_halfspace_simple(self):
        assert_allclose(kernel_halfspace(ONE, ONE), 0.5 * ONE)
        assert_allclose(kernel_halfspace(2 * ONE, 3 * ONE), 0.2 * ONE)

    def test_halfspace_slice(self):
        z = 1 + 1j
        expect = (z + 1) / (z * z + 2 * z + 1)
        assert_allclose(kernel_halfspace(ONE, ONE + I), from_complex(expect, I), atol=1e-15)

    def test_halfspace_domain(self):
        with pytest.raises(DomainViolation):
            kernel_halfspace(ONE, -ONE)

    def test_halfspace_series(self, rng):
        w, z = quat(1.3, 0.2, -0.5, 0.1), quat(0.7, -0.3, 0.8, 0.0)
        assert_allclose(kernel_halfspace_series(w, z, 200), kernel_halfspace(w, z), atol=1e-12)


class TestCayley:
    def test_values(self):
        assert_allclose(cayley(ZERO), ONE)
        assert_allclose(cayley(I / 2), quat(0.6, 0.8, 0, 0), atol=1e-15)
        assert_allclose(cayley_inv(ONE), ZERO)

    def test_domain(self):
        with pytest.raises(DomainViolation):
            cayley(ONE)
        with pytest.raises(DomainViolation):
            cayley_inv(-ONE)

    @given(st.integers(0, 2**32))
    def test_inverse(self, seed):
        rng = np.random.default_rng(seed)
        q = random_ball_point(rng, 0.95)
        w = cayley(q)
        assert w[0] > 0
        assert_allclose(cayley_inv(w), q, atol=1e-13 * (1 + norm(w)))
