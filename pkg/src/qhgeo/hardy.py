"""Hardy spaces of the quaternionic unit ball and right half-space.

The ball norm is ``||f||^2 = sum |a_n|^2`` throughout; the half-space norm of
``f(q) = int_0^inf e^{-zeta q} F(zeta) d zeta`` is ``int_0^inf |F|^2``.  Every
boundary-integral constant is reported relative to these two conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainViolation, NegativeCoefficient, QuadratureNotConverged
from .quadrature import LADDER, composite_gauss_legendre, gauss_legendre, graded_breaks, sphere_rule
from .quat import ONE, as_quat, conj, inv, mul, norm, norm2, slice_decompose
from .series import (MoebiusMap, RegularSeries, cayley_inv, eval_series, kernel_ball,
                     kernel_halfspace, moebius_eval)

__all__ = [
    "hardy_norm2", "inner_product", "delta", "KernelNorms", "kernel_norms",
    "kernel_norms_series", "rkhs_metric_coefficients", "BoundaryIntegral",
    "sphere_boundary_integral", "sphere_limit_norm", "LaplaceDensity", "ExponentialDensity",
    "PolyExpDensity", "SampledDensity", "laplace_eval", "halfspace_boundary_integral",
    "donatini_rescaling_check", "SPHERE_CONSTANT", "HALFSPACE_CONSTANT",
]

#: boundary-integral constants implied by the two norm conventions above
SPHERE_CONSTANT = math.pi ** 2
HALFSPACE_CONSTANT = math.pi ** 2 / 2

DS_BRANCH = 1e-4
BOUNDARY_OFFSET = 1e-6


def _check_ball(*qs):
    for q in qs:
        if norm(q) >= 1.0:
            raise DomainViolation(f"point must lie in the open unit ball, |q| = {float(norm(q))}")


def hardy_norm2(f: RegularSeries) -> float:
    return float(np.sum(f.coeffs ** 2))


def inner_product(f: RegularSeries, g: RegularSeries):
    """``<f, g> = sum conj(b_n) a_n`` for ``f = sum q^n a_n``, ``g = sum q^n b_n``."""
    n = min(len(f.coeffs), len(g.coeffs))
    return mul(conj(g.coeffs[:n]), f.coeffs[:n]).sum(axis=0)


def delta(w, z, method: str = "moebius") -> float:
    """Pseudo-hyperbolic distance between ``w`` and ``z`` in the ball.

    ``method="moebius"`` evaluates ``|M_w(z)|``; ``method="kernel"`` uses the
    normalized kernel inner product ``|k_w(z)|^2 (1 - |w|^2)(1 - |z|^2)``.
    """
    w = as_quat(w)
    z = as_quat(z)
    _check_ball(w, z)
    if method == "moebius":
        return float(norm(moebius_eval(MoebiusMap(w), z)))
    if method == "kernel":
        overlap = norm2(kernel_ball(w, z)) * (1.0 - norm2(w)) * (1.0 - norm2(z))
        return math.sqrt(max(0.0, 1.0 - float(overlap)))
    raise ValueError(f"unknown delta method {method!r}")


@dataclass(frozen=True)
class KernelNorms:
    """Squared norms of the Hardy kernel and of its two derivatives at ``w``."""

    kNorm2: float
    dcNorm2: float
    dsNorm2: float
    dcAtW2: float
    dsAtW2: float


def _ds_norm2_displayed(w) -> float:
    a = float(norm2(w))
    one_minus_w2 = ONE - mul(w, w)
    two_re = 2.0 * float(inv(one_minus_w2)[0])
    return (2.0 / (1.0 - a) - two_re) / (4.0 * float(norm2(w[1:])))


def _ds_norm2_limit(w) -> float:
    a = float(norm2(w))
    return (1.0 + a) / (1.0 - a) ** 3


def kernel_norms(w) -> KernelNorms:
    w = as_quat(w)
    _check_ball(w)
    a = float(norm2(w))
    m = float(norm2(ONE - mul(w, w)))
    y = float(norm(w[1:]))
    ds = _ds_norm2_limit(w) if y < DS_BRANCH else _ds_norm2_displayed(w)
    return KernelNorms(
        kNorm2=1.0 / (1.0 - a),
        dcNorm2=(1.0 + a) / (1.0 - a) ** 3,
        dsNorm2=ds,
        dcAtW2=a / (1.0 - a) ** 4,
        dsAtW2=a / ((1.0 - a) ** 2 * m),
    )


def kernel_norms_series(w, degree: int = 400) -> KernelNorms:
    """The same five quantities summed from the kernel's power series.

    With ``w = x + yI`` the spherical derivative of ``w^n`` is the real number
    ``s_n = Im(z^n) / Im(z)`` (``z`` the complex image of ``w``), and the slice
    derivative is ``n w^(n-1)``.
    """
    w = as_quat(w)
    _check_ball(w)
    sp = slice_decompose(w)
    z = complex(sp.x, sp.y)
    a = float(norm2(w))
    n = np.arange(degree + 1)
    a_prev = np.concatenate(([0.0], a ** n[:-1].astype(float)))  # a^(n-1), zero for n = 0
    zn = z ** n
    if sp.real_flag:
        s = n * np.concatenate(([0.0], (z ** n[:-1]).real))
    else:
        s = zn.imag / sp.y
    return KernelNorms(
        kNorm2=float(np.sum(a ** n.astype(float))),
        dcNorm2=float(np.sum(n ** 2 * a_prev)),
        dsNorm2=float(np.sum(s ** 2)),
        dcAtW2=a * float(np.sum(n * a_prev)) ** 2,
        dsAtW2=float(abs(np.sum(zn * s)) ** 2),
    )


def rkhs_metric_coefficients(norms: KernelNorms):
    """Slice and orthogonal metric coefficients ``(c1, c2)`` of a slice-preserving kernel."""
    k = norms.kNorm2
    n1 = k * norms.dcNorm2 - norms.dcAtW2
    n2 = k * norms.dsNorm2 - norms.dsAtW2
    for name, v in (("c1", n1), ("c2", n2)):
        if v < -1e-12:
            raise NegativeCoefficient(f"{name} numerator {v:.3e} is negative")
    return max(n1, 0.0) / k ** 2, max(n2, 0.0) / k ** 2


class BoundaryIntegral(NamedTuple):
    value: float
    refinement_error: float
    level: int


def _refine(evaluate, levels, tol, what):
    """Run ``evaluate(level)`` over consecutive levels until two agree within ``tol``."""
    prev = evaluate(levels[0])
    err = math.inf
    for k, level in enumerate(levels[1:], start=1):
        cur = evaluate(level)
        err = abs(cur - prev) / abs(cur) if cur != 0 else abs(cur - prev)
        if err <= tol:
            return BoundaryIntegral(cur, err, k)
        prev = cur
    raise QuadratureNotConverged(f"{what}: refinement error {err:.3e} above {tol:.1e}", prev, err)


def _slice_abs2(f: RegularSeries, x, y, units):
    """``|f(x + y I)|^2`` on the grid of (x, y) pairs times sphere units."""
    pts = (y[:, None, None] * units[None, :, :])
    pts[..., 0] = x[:, None]
    vals = eval_series(f, pts.reshape(-1, 4))
    return norm2(vals).reshape(len(x), len(units))


def sphere_boundary_integral(f: RegularSeries, levels=LADDER[:2], tol: float = 1e-6,
                             escalate: bool = True) -> BoundaryIntegral:
    """``int |f(e^{tI})|^2 dt dA(I) / 4`` over the unit sphere of the quaternions."""
    levels = LADDER if escalate and tuple(levels) == LADDER[:2] else levels

    def evaluate(level):
        nt, deg = level
        t, wt = gauss_legendre(nt, 0.0, math.pi)
        units, wa = sphere_rule(deg)
        vals = _slice_abs2(f, np.cos(t), np.sin(t), units)
        return 0.25 * float(wt @ vals @ wa)

    return _refine(evaluate, levels, tol, "sphere boundary integral")


def _rsphere_density(r, t):
    s2 = np.sin(t) ** 2
    e = 1.0 - r * r
    return r ** 3 * s2 / (e * (e * e + 4.0 * r * r * s2))


def sphere_limit_norm(f: RegularSeries, r: float, tol: float = 1e-6) -> BoundaryIntegral:
    """``(1 - r^2)`` times the ``g``-volume average of ``|f|^2`` over the sphere of radius ``r``."""
    if not 0.0 < r < 1.0:
        raise DomainViolation(f"radius must lie in (0, 1), got {r}")
    # the density dips to 0 within ~(1 - r^2)/(2r) of the poles t = 0, pi
    breaks = graded_breaks(0.0, math.pi, (1.0 - r * r) / (2.0 * r))

    def evaluate(level):
        nt, deg = level
        t, wt = composite_gauss_legendre(breaks, max(8, nt // 8))
        units, wa = sphere_rule(deg)
        dens = _rsphere_density(r, t) * wt
        vol = float(dens.sum() * wa.sum())
        vals = _slice_abs2(f, r * np.cos(t), r * np.sin(t), units)
        return (1.0 - r * r) * float(dens @ vals @ wa) / vol

    return _refine(evaluate, LADDER, tol, "sphere-limit integral")


# --- half-space: Laplace representation -------------------------------------------------


class LaplaceDensity:
    """Base class of densities ``F`` on ``[0, inf)``; subclasses define the family."""

    #: exponential decay rate of ``|F|`` and degree of its polynomial prefactor
    decay = 0.0
    poly_degree = 0

    def values(self, zeta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def norm2(self) -> float:
        raise NotImplementedError

    def closed_form(self, q):
        """Exact ``f(q)`` for stacks of points, or ``None`` when unavailable."""
        return None


@dataclass(frozen=True)
class ExponentialDensity(LaplaceDensity):
    """``F(zeta) = e^{-zeta conj(w)} c``, whose transform is ``k_w(q) c``."""

    w: np.ndarray = field(default_factory=lambda: ONE.copy())
    coeff: np.ndarray = field(default_factory=lambda: ONE.copy())

    def __post_init__(self):
        w = as_quat(self.w).copy()
        if w[0] <= 0.0:
            raise DomainViolation(f"exponential density needs Re(w) > 0, got {w[0]}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "coeff", as_quat(self.coeff).copy())

    @property
    def decay(self):
        return float(self.w[0])

    def values(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        sp = slice_decompose(self.w)
        e = np.exp(-zeta * sp.x)
        rot = np.cos(zeta * sp.y)[:, None] * ONE + np.sin(zeta * sp.y)[:, None] * sp.unit
        return mul(e[:, None] * rot, self.coeff)

    def norm2(self):
        return float(norm2(self.coeff)) / (2.0 * self.w[0])

    def closed_form(self, q):
        q = np.asarray(q, dtype=float)
        den = mul(q, q) + 2.0 * self.w[0] * q + float(norm2(self.w)) * ONE
        return mul(mul(inv(den), q + self.w), self.coeff)


@dataclass(frozen=True)
class PolyExpDensity(LaplaceDensity):
    """``F(zeta) = e^{-s zeta} sum_k zeta^k c_k`` with real ``s > 0``."""

    s: float = 1.0
    coeffs: np.ndarray = field(default_factory=lambda: ONE[None, :].copy())

    def __post_init__(self):
        if self.s <= 0.0:
            raise DomainViolation(f"decay rate must be positive, got {self.s}")
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float)).copy()
        object.__setattr__(self, "coeffs", c)

    @property
    def decay(self):
        return float(self.s)

    @property
    def poly_degree(self):
        return len(self.coeffs) - 1

    def values(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        powers = zeta[:, None] ** np.arange(len(self.coeffs))[None, :]
        return np.exp(-self.s * zeta)[:, None] * (powers @ self.coeffs)

    def norm2(self):
        k = np.arange(len(self.coeffs))
        gram = self.coeffs @ self.coeffs.T
        fact = np.array([[math.factorial(i + j) / (2.0 * self.s) ** (i + j + 1) for j in k] for i in k])
        return float(np.sum(gram * fact))

    def closed_form(self, q):
        # s is real, so (q + s)^-(k+1) is an ordinary power
        q = np.asarray(q, dtype=float)
        base = inv(q + self.s * ONE)
        out = np.zeros(np.broadcast_shapes(q.shape, (4,)))
        p = base
        for k, c in enumerate(self.coeffs):
            out = out + math.factorial(k) * mul(p, c)
            p = mul(p, base)
        return out


@dataclass(frozen=True)
class SampledDensity(LaplaceDensity):
    """``F`` known only at quadrature nodes ``zeta`` with weights ``weights``."""

    zeta: np.ndarray = field(default_factory=lambda: np.zeros(1))
    samples: np.ndarray = field(default_factory=lambda: np.zeros((1, 4)))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        for name in ("zeta", "samples", "weights"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.samples.shape != (len(self.zeta), 4) or self.weights.shape != self.zeta.shape:
            raise ValueError("sampled density needs matching zeta, samples (n, 4) and weights")

    def values(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        return np.stack([np.interp(zeta, self.zeta, self.samples[:, c]) for c in range(4)], axis=-1)

    def norm2(self):
        return float(self.weights @ norm2(self.samples))


def _laplace_sum(zeta, weights, Fv, q):
    sp = slice_decompose(q)
    e = weights * np.exp(-zeta * sp.x)
    A = (e * np.cos(zeta * sp.y)) @ Fv
    B = (e * np.sin(zeta * sp.y)) @ Fv
    return A - mul(sp.unit, B)


def laplace_eval(F: LaplaceDensity, q, nodes: int = 24, tol: float = 1e-11):
    """``f(q) = int_0^inf e^{-zeta q} F(zeta) d zeta`` by oscillation-aware quadrature.

    With ``q = x + yI`` the integrand is ``e^{-zeta x}(cos(zeta y) - I sin(zeta y)) F``;
    panels are at most half a period long and the range is cut where the
    combined exponential decay falls below double precision.
    """
    q = as_quat(q)
    if q[0] <= 0.0:
        raise DomainViolation(f"laplace_eval requires Re(q) > 0, got {q[0]}")
    if isinstance(F, SampledDensity):
        return _laplace_sum(F.zeta, F.weights, F.samples, q)
    sp = slice_decompose(q)
    rate = sp.x + F.decay
    if rate <= 0.0:
        raise DomainViolation("integrand does not decay")
    top = (45.0 + 4.0 * F.poly_degree) / rate
    panels = max(8, int(math.ceil(top * max(sp.y, F.decay, 1.0) / math.pi)))
    breaks = np.linspace(0.0, top, panels + 1)

    def level(n):
        z, wz = composite_gauss_legendre(breaks, n)
        return _laplace_sum(z, wz, F.values(z), q)

    coarse, fine = level(nodes), level(2 * nodes)
    err = float(norm(fine - coarse))
    if err > tol * (1.0 + float(norm(fine))):
        raise QuadratureNotConverged(f"Laplace quadrature error {err:.3e}", fine, err)
    return fine


def _boundary_values(F: LaplaceDensity, pts):
    exact = F.closed_form(pts)
    if exact is None:
        # a sampled density cannot resolve e^{-zeta y I} as y -> inf
        raise ValueError("boundary integrals need a named density family with a closed form")
    return exact


def halfspace_boundary_integral(F: LaplaceDensity, eps_bd: float = BOUNDARY_OFFSET,
                                tol: float = 1e-6) -> BoundaryIntegral:
    """``int_S int_0^inf |f(yI)|^2 dy dA(I) / 8`` with ``f`` sampled at real part ``eps_bd``.

    The half-line is mapped to ``[0, pi/2)`` by ``y = tan(phi)`` so no cutoff
    is needed: ``|f|^2 = O(y^-2)`` makes the transformed integrand bounded.
    """

    def evaluate(level):
        nphi, deg = level
        phi, wphi = gauss_legendre(nphi, 0.0, 0.5 * math.pi)
        y = np.tan(phi)
        jac = wphi / np.cos(phi) ** 2
        units, wa = sphere_rule(deg)
        pts = y[:, None, None] * units[None, :, :]
        pts[..., 0] = eps_bd
        vals = norm2(_boundary_values(F, pts.reshape(-1, 4))).reshape(len(y), len(units))
        return float(jac @ vals @ wa) / 8.0

    return _refine(evaluate, LADDER, tol, "half-space boundary integral")


def donatini_rescaling_check(w, z):
    """Both sides of ``k_B(C^-1 w, C^-1 z) = (1 + z) k_H(w, z) (1 + conj(w)) / 2``."""
    w = as_quat(w)
    z = as_quat(z)
    if w[0] <= 0.0 or z[0] <= 0.0:
        raise DomainViolation("donatini_rescaling_check requires Re(w), Re(z) > 0")
    lhs = kernel_ball(cayley_inv(w), cayley_inv(z))
    rhs = 0.5 * mul(mul(ONE + z, kernel_halfspace(w, z)), ONE + conj(w))
    return lhs, rhs
