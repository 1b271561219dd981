"""The invariant metrics ``g`` on the unit ball and ``h`` on the right half-space.

At ``w = x + yI`` a tangent vector splits as ``d = d1 + d2`` with ``d1`` in the
slice ``span{1, I}`` and ``d2`` Euclidean-orthogonal to it; both metrics are
``c1 |d1|^2 + c2 |d2|^2`` with

* ball:       ``c1 = 1 / (1 - |w|^2)^2``,  ``c2 = 1 / |1 - w^2|^2``
* half-space: ``c1 = 1 / (4 Re(u)^2)``,   ``c2 = 1 / (4 |u|^2)``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._backend import kernels, model_code
from .errors import DomainViolation, NoConvergence, StepTooLarge
from .quat import (I, ONE, SlicePoint, as_quat, conj, inv, mul, norm, norm2, slice_decompose,
                   tangent_split)

__all__ = [
    "MODELS", "metric_coefficients", "metric_ball", "metric_halfspace", "metric_norm",
    "metric_polar", "polar_velocity_to_cartesian", "MetricSample", "metric_sample",
    "volume_density", "IsometryMap", "apply_isometry", "random_rotation", "pullback_ratio",
    "Polyline", "curve_length", "slice_projection", "slice_distance", "domain_margin",
]

MODELS = ("ball", "halfspace")


def domain_margin(q, model: str) -> float:
    """Euclidean distance from ``q`` to the boundary of the model domain."""
    q = as_quat(q)
    if model == "ball":
        return 1.0 - float(norm(q))
    if model == "halfspace":
        return float(q[0])
    raise ValueError(f"unknown model {model!r}")


def _check(q, model):
    if domain_margin(q, model) <= 0.0:
        where = "|w| < 1" if model == "ball" else "Re(u) > 0"
        raise DomainViolation(f"{model} metric requires {where}, got {q.tolist()}")


def metric_coefficients(w, model: str = "ball"):
    """``(c1, c2)`` at ``w``; equal at real points, where the metric is conformal."""
    w = as_quat(w)
    _check(w, model)
    if model == "ball":
        c1 = 1.0 / (1.0 - float(norm2(w))) ** 2
        c2 = 1.0 / float(norm2(ONE - mul(w, w)))
    else:
        c1 = 1.0 / (4.0 * w[0] ** 2)
        c2 = 1.0 / (4.0 * float(norm2(w)))
    if slice_decompose(w).real_flag:
        c2 = c1
    return c1, c2


def _metric(w, d, model):
    w = as_quat(w)
    d = as_quat(d)
    c1, c2 = metric_coefficients(w, model)
    d1, d2 = tangent_split(w, d)
    return math.sqrt(c1 * float(norm2(d1)) + c2 * float(norm2(d2)))


def metric_ball(w, d) -> float:
    """Length ``|d|_{g(w)}`` of the tangent vector ``d`` at ``w`` in the ball."""
    return _metric(w, d, "ball")


def metric_halfspace(u, v) -> float:
    """Length ``|v|_{h(u)}`` of the tangent vector ``v`` at ``u`` in the half-space."""
    return _metric(u, v, "halfspace")


def metric_norm(w, d, model: str = "ball") -> float:
    return _metric(w, d, model)


def polar_velocity_to_cartesian(r, t, unit, vel):
    """Cartesian velocity of ``r e^{tI}`` moving with ``(r', t', I')``."""
    rdot, tdot, idot = vel
    unit = as_quat(unit)
    idot = as_quat(idot)
    e = math.cos(t) * ONE + math.sin(t) * unit
    de = -math.sin(t) * ONE + math.cos(t) * unit
    return rdot * e + r * tdot * de + r * math.sin(t) * idot


def metric_polar(r, t, unit, vel) -> float:
    """Warped-product form of ``g`` in coordinates ``(r, t, I)``.

    ``vel = (r', t', I')`` with ``I'`` tangent to the sphere at ``I``.  At
    ``r = 0`` the chart degenerates and the Cartesian form is used instead.
    """
    if not 0.0 <= r < 1.0:
        raise DomainViolation(f"polar radius must lie in [0, 1), got {r}")
    rdot, tdot, idot = vel
    idot = as_quat(idot)
    if abs(float(idot @ as_quat(unit))) > 1e-12 * (1.0 + float(norm(idot))):
        raise ValueError("I' must be orthogonal to I")
    if r == 0.0:
        return metric_ball(np.zeros(4), polar_velocity_to_cartesian(r, t, unit, vel))
    e = 1.0 - r * r
    s2 = math.sin(t) ** 2
    q = (rdot ** 2 + r * r * tdot ** 2) / e ** 2 + r * r * s2 * float(norm2(idot)) / (e * e + 4 * r * r * s2)
    return math.sqrt(q)


@dataclass(frozen=True)
class MetricSample:
    """Metric coefficients and Gram matrix (standard basis ``1, i, j, k``) at a point."""

    point: SlicePoint
    c1: float
    c2: float
    gram: np.ndarray = field(repr=False)


def metric_sample(w, model: str = "ball") -> MetricSample:
    w = as_quat(w)
    c1, c2 = metric_coefficients(w, model)
    sp = slice_decompose(w)
    basis = np.stack([ONE, sp.unit])
    p1 = basis.T @ basis
    gram = c1 * p1 + c2 * (np.eye(4) - p1)
    gram.flags.writeable = False
    return MetricSample(sp, c1, c2, gram)


def volume_density(point, locus: str = "ball", **params) -> float:
    """Closed-form volume densities.

    ``locus`` is one of

    * ``"ball"``: ``dVol_g / dVol_Euc`` at ``point``
    * ``"rsphere"``: density in ``dt dA(I)`` on the sphere ``|q| = r`` through ``point``
    * ``"s3limit"``: the boundary density ``1/4`` in ``dt dA(I)``
    * ``"horocycle"``: density on ``Re(u) = c`` (``c`` defaults to ``Re(point)``)
    * ``"hs_boundary"``: density on the boundary ``Re(u) = 0``
    """
    q = as_quat(point)
    if locus == "ball":
        _check(q, "ball")
        return 1.0 / ((1.0 - float(norm2(q))) ** 2 * float(norm2(ONE - mul(q, q))))
    if locus == "rsphere":
        r = float(norm(q))
        if not 0.0 < r < 1.0:
            raise DomainViolation(f"rsphere density needs 0 < |q| < 1, got {r}")
        s2 = float(norm2(q[1:])) / (r * r)
        e = 1.0 - r * r
        return r ** 3 * s2 / (e * (e * e + 4.0 * r * r * s2))
    if locus == "s3limit":
        if abs(float(norm(q)) - 1.0) > 1e-12:
            raise DomainViolation("s3limit density lives on the unit sphere")
        return 0.25
    if locus == "horocycle":
        c = float(params.get("c", q[0]))
        if c <= 0.0 or abs(q[0] - c) > 1e-12 * (1.0 + c):
            raise DomainViolation(f"point is not on the horocycle Re(u) = {c}")
        return 1.0 / (8.0 * c * (c * c + float(norm2(q[1:]))))
    if locus == "hs_boundary":
        if abs(q[0]) > 1e-12 or not np.any(q[1:]):
            raise DomainViolation("hs_boundary density needs a nonzero purely imaginary point")
        return 1.0 / (8.0 * float(norm2(q)))
    raise ValueError(f"unknown volume locus {locus!r}")


# --- isometries ----------------------------------------------------------------------------

_KINDS = {
    "moebius_real": "ball", "sphere_isometry": "ball", "reflection": "ball",
    "hs_dilation": "halfspace", "hs_sphere_isometry": "halfspace", "hs_inversion": "halfspace",
}


def random_rotation(rng: np.random.Generator, proper: bool | None = None) -> np.ndarray:
    """Haar-random element of O(3) from the QR factorization of a Gaussian matrix.

    ``proper=True`` forces det = +1, ``False`` forces det = -1, ``None`` keeps
    whichever sign the factorization produced.
    """
    qm, rm = np.linalg.qr(rng.normal(size=(3, 3)))
    qm = qm * np.sign(np.diag(rm))
    if proper is not None and (np.linalg.det(qm) > 0) != proper:
        qm[:, 0] = -qm[:, 0]
    return qm


@dataclass(frozen=True)
class IsometryMap:
    """One of the generating isometries of ``(B, g)`` or ``(H+, h)``.

    ``param`` is ``lambda`` for ``moebius_real`` (in (-1, 1)) and ``hs_dilation``
    (positive), a 3x3 orthogonal matrix for the two sphere isometries, and
    unused otherwise.
    """

    kind: str
    param: object = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown isometry kind {self.kind!r}")
        if self.kind == "moebius_real" and not -1.0 < float(self.param) < 1.0:
            raise DomainViolation(f"moebius_real needs lambda in (-1, 1), got {self.param}")
        if self.kind == "hs_dilation" and not float(self.param) > 0.0:
            raise DomainViolation(f"hs_dilation needs lambda > 0, got {self.param}")
        if self.kind in ("sphere_isometry", "hs_sphere_isometry"):
            a = np.array(self.param, dtype=float)
            if a.shape != (3, 3) or np.max(np.abs(a.T @ a - np.eye(3))) > 1e-13:
                raise DomainViolation("sphere isometry needs an orthogonal 3x3 matrix")
            a.flags.writeable = False
            object.__setattr__(self, "param", a)

    @property
    def model(self) -> str:
        return _KINDS[self.kind]

    def __call__(self, q):
        return apply_isometry(self, q)

    def to_json(self) -> dict:
        p = self.param
        return {"kind": self.kind, "param": p.tolist() if isinstance(p, np.ndarray) else p}


def apply_isometry(m: IsometryMap, q):
    q = as_quat(q)
    _check(q, m.model)
    kind = m.kind
    if kind == "moebius_real":
        lam = float(m.param)
        # a real parameter commutes with q, so the regular quotient is pointwise
        return mul(inv(ONE - lam * q), q - lam * ONE)
    if kind in ("sphere_isometry", "hs_sphere_isometry"):
        return np.concatenate(([q[0]], m.param @ q[1:]))
    if kind == "reflection":
        return -conj(q)
    if kind == "hs_dilation":
        return float(m.param) * q
    return q / float(norm2(q))  # hs_inversion: 1 / conj(q)


def pullback_ratio(fmap: Callable, w, d, model: str = "ball", target_model: str | None = None,
                   step: float = 1e-6, margin: float = 1e-4) -> float:
    """``|f_*(w) d|`` measured at ``f(w)`` over ``|d|`` measured at ``w``.

    The differential is a central difference along ``d``.  If the stencil
    would leave the domain the step is divided by ten, at most twice.
    """
    w = as_quat(w)
    d = as_quat(d)
    target_model = model if target_model is None else target_model
    dist = domain_margin(w, model)
    if dist <= margin:
        raise DomainViolation(f"point within {margin} of the boundary (margin {dist:.3e})")
    dn = float(norm(d))
    if dn == 0.0:
        raise ValueError("tangent vector must be nonzero")
    u = d / dn
    h = step
    for _ in range(3):
        if h < 0.5 * dist:
            break
        h *= 0.1
    else:
        raise StepTooLarge(f"step {step} cannot be shrunk below half the boundary margin {dist:.3e}")
    push = (as_quat(fmap(w + h * u)) - as_quat(fmap(w - h * u))) / (2.0 * h)
    image = as_quat(fmap(w))
    return metric_norm(image, push, target_model) / metric_norm(w, u, model)


# --- curves ---------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered points in a model domain joined by Euclidean segments.

    When ``curve`` (a map from ``[0, 1]`` to the domain) is given, ``params``
    holds the parameters of ``points`` and refinement samples the curve
    instead of the segments.
    """

    points: np.ndarray
    model: str = "ball"
    curve: Callable | None = field(default=None, repr=False)
    params: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float)).copy()
        if p.shape[1] != 4:
            raise ValueError("polyline points must have shape (m, 4)")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        margins = 1.0 - norm(p) if self.model == "ball" else p[:, 0]
        if np.any(margins < 1e-9):
            raise DomainViolation("polyline leaves the open domain (margin < 1e-9)")
        if len(p) > 1 and np.any(norm(np.diff(p, axis=0)) == 0.0):
            raise ValueError("consecutive polyline points must be distinct")
        p.flags.writeable = False
        object.__setattr__(self, "points", p)
        if self.curve is not None:
            t = np.linspace(0.0, 1.0, len(p)) if self.params is None else np.asarray(self.params, float)
            object.__setattr__(self, "params", t)

    @classmethod
    def from_curve(cls, curve: Callable, model: str = "ball", n: int = 16) -> "Polyline":
        t = np.linspace(0.0, 1.0, n + 1)
        return cls(_sample(curve, t), model, curve, t)

    def raw_length(self) -> float:
        """Midpoint-rule length without refinement."""
        return float(kernels.polyline_length(self.points, model_code(self.model)))

    def refined(self) -> "Polyline":
        p = self.points
        if self.curve is None:
            mids = 0.5 * (p[1:] + p[:-1])
            t = None
        else:
            tm = 0.5 * (self.params[1:] + self.params[:-1])
            mids = _sample(self.curve, tm)
            t = np.empty(2 * len(p) - 1)
            t[0::2], t[1::2] = self.params, tm
        out = np.empty((2 * len(p) - 1, 4))
        out[0::2], out[1::2] = p, mids
        return Polyline(out, self.model, self.curve, t)


def _sample(curve, t):
    # curves flagged ``vectorized`` take the whole parameter array at once
    if getattr(curve, "vectorized", False):
        return np.asarray(curve(t), dtype=float).reshape(len(t), 4)
    return np.stack([as_quat(curve(s)) for s in t])


def curve_length(poly: Polyline, rtol: float = 1e-8, max_levels: int = 22) -> float:
    """Metric length of ``poly`` refined by midpoint insertion until it settles.

    The midpoint sums converge like ``h^2``, so successive levels are
    Richardson-combined and refinement stops once two combined values differ
    by less than ``rtol`` relative.
    """
    if len(poly.points) < 2:
        return 0.0
    prev_raw = poly.raw_length()
    prev = None
    for _ in range(max_levels):
        poly = poly.refined()
        raw = poly.raw_length()
        extrap = (4.0 * raw - prev_raw) / 3.0
        if prev is not None and abs(extrap - prev) <= rtol * abs(extrap):
            return extrap
        prev, prev_raw = extrap, raw
    raise NoConvergence(f"curve length did not settle to {rtol} after {max_levels} refinements", prev)


def slice_projection(q, unit=I):
    """``x + yI -> x + y I0`` with ``I0 = i`` by default."""
    sp = slice_decompose(q)
    out = sp.y * as_quat(unit)
    out[0] = sp.x
    return out


def slice_distance(q1, q2, model: str = "ball") -> float:
    """Distance in a slice between the projections of ``q1`` and ``q2``.

    Ball slices carry ``|dz|^2 / (1 - |z|^2)^2`` and half-space slices
    ``|dz|^2 / (4 x^2)``.
    """
    s1, s2 = slice_decompose(q1), slice_decompose(q2)
    z1, z2 = s1.as_complex(), s2.as_complex()
    if model == "ball":
        if abs(z1) >= 1.0 or abs(z2) >= 1.0:
            raise DomainViolation("points must lie in the unit ball")
        return math.atanh(min(1.0, abs(z1 - z2) / abs(1.0 - z1.conjugate() * z2)))
    if model == "halfspace":
        if z1.real <= 0.0 or z2.real <= 0.0:
            raise DomainViolation("points must lie in the right half-space")
        return 0.5 * math.acosh(1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.real * z2.real))
    raise ValueError(f"unknown model {model!r}")
