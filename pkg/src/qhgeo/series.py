"""Slice-regular power series ``f(q) = sum q^n a_n`` and their star algebra.

Coefficients always sit to the right of the powers of ``q``.  Products of
series are star products (coefficient convolution, left factor on the left);
pointwise quantities such as regular quotients go through the conjugation
``T_f(q) = f^c(q)^-1 q f^c(q)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .errors import (DegreeOverflow, DomainViolation, NonInvertible, SingularAt,
                     ZeroAtPoint)
from .quat import ONE, as_quat, conj, inv, mul, norm, norm2, slice_decompose

__all__ = [
    "DEFAULT_DEGREE_CAP", "RegularSeries", "MoebiusMap", "eval_series", "star_mul",
    "star_pointwise_identity", "conj_series", "symmetrization", "star_inverse",
    "T_f", "regular_quotient", "slice_derivative", "spherical_derivative",
    "representation_formula", "moebius_eval", "kernel_ball", "kernel_ball_series",
    "kernel_ball_tail_bound", "kernel_halfspace", "kernel_halfspace_series",
    "cayley", "cayley_inv",
]

DEFAULT_DEGREE_CAP = 512
SINGULAR_THRESHOLD = 1e-13
NONINVERTIBLE_THRESHOLD = 1e-14


@dataclass(frozen=True, eq=False)
class RegularSeries:
    """Truncated slice-regular power series with quaternion coefficients.

    ``coeffs`` has shape ``(N + 1, 4)``; exact trailing zeros are dropped on
    construction (the zero series keeps a single zero coefficient).
    """

    coeffs: np.ndarray
    cap: int = field(default=DEFAULT_DEGREE_CAP, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c.reshape(-1, 4) if c.size % 4 == 0 and c.size else c[:, None] * ONE
        if c.ndim != 2 or c.shape[1] != 4 or len(c) == 0:
            raise ValueError(f"coefficients must have shape (N+1, 4), got {np.shape(self.coeffs)}")
        nz = np.flatnonzero(np.any(c != 0.0, axis=1))
        c = c[: nz[-1] + 1] if len(nz) else c[:1] * 0.0
        if len(c) - 1 > self.cap:
            raise DegreeOverflow(f"degree {len(c) - 1} exceeds cap {self.cap}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, c) -> "RegularSeries":
        return cls(as_quat(c)[None, :])

    @classmethod
    def from_real(cls, values) -> "RegularSeries":
        values = np.asarray(values, dtype=float)
        c = np.zeros((len(values), 4))
        c[:, 0] = values
        return cls(c)

    @classmethod
    def monomial(cls, n: int, a=ONE) -> "RegularSeries":
        c = np.zeros((n + 1, 4))
        c[n] = as_quat(a)
        return cls(c)

    @classmethod
    def from_json(cls, obj) -> "RegularSeries":
        return cls(np.asarray(obj["coeffs"], dtype=float).reshape(-1, 4))

    def to_json(self) -> dict:
        return {"coeffs": self.coeffs.tolist()}

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_real(self) -> bool:
        return not np.any(self.coeffs[:, 1:])

    def truncate(self, degree: int) -> "RegularSeries":
        return RegularSeries(self.coeffs[: degree + 1], cap=self.cap)

    def __call__(self, q):
        return eval_series(self, q)

    def __add__(self, other: "RegularSeries") -> "RegularSeries":
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros((n, 4))
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return RegularSeries(c, cap=self.cap)

    def __sub__(self, other: "RegularSeries") -> "RegularSeries":
        return self + RegularSeries(-other.coeffs, cap=other.cap)

    def __mul__(self, other: "RegularSeries") -> "RegularSeries":
        return star_mul(self, other)

    def scale_right(self, c) -> "RegularSeries":
        """The series ``f(q) c`` (right multiplication keeps regularity)."""
        return RegularSeries(mul(self.coeffs, as_quat(c)), cap=self.cap)


def eval_series(f: RegularSeries, q):
    """Evaluate ``f`` at a quaternion or a stack of quaternions of shape ``(m, 4)``."""
    return kernels.series_eval(f.coeffs, np.asarray(q, dtype=float))


def star_mul(f: RegularSeries, g: RegularSeries, cap: int | None = None) -> RegularSeries:
    cap = min(f.cap, g.cap) if cap is None else cap
    if f.degree + g.degree > cap:
        raise DegreeOverflow(f"star product degree {f.degree + g.degree} exceeds cap {cap}")
    return RegularSeries(kernels.star_convolve(f.coeffs, g.coeffs), cap=cap)


def star_pointwise_identity(f: RegularSeries, g: RegularSeries, q, zero_tol: float = 1e-14):
    """Both sides of ``f*g(q) = f(q) g(f(q)^-1 q f(q))``.

    Raises :class:`ZeroAtPoint` (carrying ``lhs``) when ``f(q) = 0``.
    """
    q = as_quat(q)
    lhs = eval_series(star_mul(f, g), q)
    fq = eval_series(f, q)
    if norm(fq) <= zero_tol:
        raise ZeroAtPoint(q, lhs)
    rhs = mul(fq, eval_series(g, mul(mul(inv(fq), q), fq)))
    return lhs, rhs


def conj_series(f: RegularSeries) -> RegularSeries:
    return RegularSeries(conj(f.coeffs), cap=f.cap)


def symmetrization(f: RegularSeries) -> RegularSeries:
    """``f^s = f * f^c``; its coefficients are real."""
    return star_mul(f, conj_series(f))


def _real_reciprocal(a: np.ndarray, degree: int) -> np.ndarray:
    """Coefficients of ``1 / sum a_n q^n`` up to ``q^degree`` for real ``a``."""
    b = np.zeros(degree + 1)
    b[0] = 1.0 / a[0]
    for n in range(1, degree + 1):
        m = min(n, len(a) - 1)
        b[n] = -np.dot(a[1: m + 1], b[n - 1::-1][:m]) / a[0]
    return b


def star_inverse(f: RegularSeries, degree: int) -> RegularSeries:
    """Truncated regular reciprocal ``f^-* = (f^s)^-1 f^c`` up to ``q^degree``."""
    if norm(f.coeffs[0]) < NONINVERTIBLE_THRESHOLD:
        raise NonInvertible("constant coefficient vanishes; f^-* has no power series at 0")
    fs = symmetrization(f).coeffs[:, 0]
    recip = RegularSeries.from_real(_real_reciprocal(fs, degree))
    h = star_mul(recip, conj_series(f).truncate(degree), cap=max(f.cap, 2 * degree))
    return RegularSeries(h.coeffs[: degree + 1], cap=f.cap)


def T_f(f: RegularSeries, q):
    """``f^c(q)^-1 q f^c(q)``; defined wherever ``f^c(q) != 0``."""
    q = as_quat(q)
    fc = eval_series(conj_series(f), q)
    if norm(fc) < SINGULAR_THRESHOLD:
        raise SingularAt(q, float(norm(fc)))
    return mul(mul(inv(fc), q), fc)


def regular_quotient(f: RegularSeries, g: RegularSeries, q):
    """Value at ``q`` of ``f^-* * g``, computed as ``f(T_f(q))^-1 g(T_f(q))``.

    Raises :class:`SingularAt` on the zero set of ``f^s``.
    """
    q = as_quat(q)
    fs = eval_series(symmetrization(f), q)
    if norm(fs) < SINGULAR_THRESHOLD:
        raise SingularAt(q, float(norm(fs)))
    t = T_f(f, q)
    return mul(inv(eval_series(f, t)), eval_series(g, t))


def slice_derivative(f: RegularSeries) -> RegularSeries:
    if f.degree == 0:
        return RegularSeries(np.zeros((1, 4)), cap=f.cap)
    n = np.arange(1, f.degree + 1, dtype=float)
    return RegularSeries(f.coeffs[1:] * n[:, None], cap=f.cap)


def spherical_derivative(f: RegularSeries, q):
    """``(q - q̄)^-1 (f(q) - f(q̄))``; on the real axis its removable value ``f'(x)``."""
    q = as_quat(q)
    sp = slice_decompose(q)
    if sp.real_flag:
        return eval_series(slice_derivative(f), ONE * sp.x)
    qb = conj(q)
    return mul(inv(q - qb), eval_series(f, q) - eval_series(f, qb))


def representation_formula(f: RegularSeries, x: float, y: float, unit_i, unit_j):
    """Reconstruct ``f(x + yJ)`` from the values of ``f`` on the slice ``L_I``."""
    unit_i = as_quat(unit_i)
    unit_j = as_quat(unit_j)
    plus = eval_series(f, x * ONE + y * unit_i)
    minus = eval_series(f, x * ONE - y * unit_i)
    return 0.5 * (plus + minus) + mul(mul(unit_j, 0.5 * unit_i), minus - plus)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """Regular Möbius transformation ``q -> (1 - q ā)^-* * (q - a) u``."""

    a: np.ndarray
    u: np.ndarray = field(default_factory=lambda: ONE.copy())

    def __post_init__(self):
        a = as_quat(self.a).copy()
        u = as_quat(self.u).copy()
        if norm(a) >= 1.0 - 1e-12:
            raise DomainViolation(f"Möbius parameter must satisfy |a| < 1, got |a| = {norm(a)}")
        if abs(norm(u) - 1.0) > 1e-14:
            raise DomainViolation(f"rotation factor must be a unit quaternion, got |u| = {norm(u)}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "u", u)

    @property
    def denominator(self) -> RegularSeries:
        return RegularSeries(np.stack([ONE, -conj(self.a)]))

    @property
    def numerator(self) -> RegularSeries:
        return RegularSeries(np.stack([-self.a, ONE]))

    def __call__(self, q):
        return moebius_eval(self, q)


def moebius_eval(m: MoebiusMap, q):
    q = as_quat(q)
    if norm(q) >= 1.0:
        raise DomainViolation(f"Möbius maps are evaluated on the open unit ball, |q| = {norm(q)}")
    # with f = 1 - q ā: f^-* * (q - a) = (f^s)^-1 (f^c * (q - a)), and f^s has real
    # coefficients, so it factors out pointwise
    a = m.a
    qq = mul(q, q)
    fs = ONE - 2.0 * a[0] * q + norm2(a) * qq
    if norm(fs) < SINGULAR_THRESHOLD:
        raise SingularAt(q, float(norm(fs)))
    num = mul(q, ONE + mul(a, a)) - a - mul(qq, a)
    return mul(mul(inv(fs), num), m.u)


def kernel_ball(w, q):
    """Hardy-space reproducing kernel ``k_w(q) = (1 - q w̄)^-*`` in closed form."""
    w = as_quat(w)
    q = as_quat(q)
    if norm(q) * norm(w) >= 1.0:
        raise DomainViolation("kernel_ball requires |q||w| < 1")
    den = ONE - 2.0 * w[0] * q + norm2(w) * mul(q, q)
    return mul(inv(den), ONE - mul(q, w))


def kernel_ball_series(w, degree: int) -> RegularSeries:
    """Truncation ``sum_{n <= degree} q^n w̄^n`` of the ball kernel."""
    # powers of w̄ stay in the slice of w: w̄^n = Re(z^n) + Im(z^n) I with z = x - iy
    w = as_quat(w)
    y = float(norm(w[1:]))
    unit = np.concatenate(([0.0], w[1:] / y)) if y > 0.0 else ONE * 0.0
    z = np.full(degree + 1, complex(w[0], -y))
    z[0] = 1.0
    zn = np.cumprod(z)
    c = zn.real[:, None] * ONE + zn.imag[:, None] * unit
    return RegularSeries(c, cap=max(DEFAULT_DEGREE_CAP, degree))


def kernel_ball_tail_bound(rho: float, degree: int) -> float:
    """Bound ``rho^(N+1) / (1 - rho)`` on the omitted tail, ``rho = |q||w|``."""
    return rho ** (degree + 1) / (1.0 - rho)


def kernel_halfspace(w, q):
    """Hardy kernel of the right half-space, ``(q + w̄)^-*`` in closed form."""
    w = as_quat(w)
    q = as_quat(q)
    if q[0] <= 0.0 or w[0] <= 0.0:
        raise DomainViolation("kernel_halfspace requires Re(q) > 0 and Re(w) > 0")
    den = mul(q, q) + 2.0 * w[0] * q + norm2(w) * ONE
    return mul(inv(den), q + w)


def kernel_halfspace_series(w, q, degree: int):
    """Half-space kernel from the truncated ball series, rescaled through the Cayley map.

    Uses ``k_H(w, q) = 2 (1 + q)^-1 k_B(C^-1 w, C^-1 q) (1 + w̄)^-1``.
    """
    w = as_quat(w)
    q = as_quat(q)
    kb = eval_series(kernel_ball_series(cayley_inv(w), degree), cayley_inv(q))
    return 2.0 * mul(mul(inv(ONE + q), kb), inv(ONE + conj(w)))


def cayley(q):
    """``C(q) = (1 - q)^-1 (1 + q)``, the unit ball onto the right half-space."""
    q = as_quat(q)
    if norm(q) >= 1.0:
        raise DomainViolation(f"cayley requires |q| < 1, got {norm(q)}")
    return mul(inv(ONE - q), ONE + q)


def cayley_inv(q):
    q = as_quat(q)
    if q[0] <= 0.0:
        raise DomainViolation(f"cayley_inv requires Re(q) > 0, got {q[0]}")
    return mul(inv(ONE + q), q - ONE)
