"""Geodesics of the invariant metric and two-sided distance estimates.

Two engines are kept independent on purpose:

* the reduced surface of revolution ``D`` (purely imaginary points whose unit
  runs over a great circle), where ``rho`` is the hyperbolic radius, ``theta``
  the angle along the circle and the metric is ``drho^2 + Psi(rho)^2 dtheta^2``
  with ``Psi = tanh(2 rho) / 2``;
* Cartesian integration in ``R^4`` with Christoffel symbols built from the
  closed-form derivatives of the Gram field (see :mod:`qhgeo._backend`).

Distance estimates combine closed-form slice distances, sphere arcs at fixed
``(x, y)``, geodesic shooting and discrete curve shortening.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import LinAlgError, solveh_banded
from scipy.optimize import least_squares

from ._backend import kernels, model_code
from .errors import DomainViolation, NoConvergence, SingularChart
from .metric import MODELS, Polyline, curve_length, domain_margin, slice_distance
from .quat import I, J, as_quat, norm, slice_decompose, sphere_distance

__all__ = [
    "rho_of_r", "r_of_rho", "surface_curvature", "slice_curvature",
    "SurfaceState", "surface_geodesic", "surface_return_length", "surface_to_cartesian",
    "GeodesicTrace", "cartesian_geodesic", "killing_momentum",
    "DistanceBounds", "distance_bounds", "bilateral_quantity", "shoot_distance", "polyline_relax",
]

AXIS_TOL = 1e-8
START_MARGIN = 1e-3


# ---------------------------------------------------------------------------
# radial coordinate and curvature


def rho_of_r(r: float) -> float:
    """Hyperbolic distance from 0 to the radius ``r``, ``atanh(r)``."""
    if not 0.0 <= r < 1.0:
        raise DomainViolation(f"r = {r} outside [0, 1)")
    return math.atanh(r)


def r_of_rho(rho: float) -> float:
    """Inverse of :func:`rho_of_r`."""
    if rho < 0.0:
        raise DomainViolation(f"rho = {rho} is negative")
    return math.tanh(rho)


def surface_curvature(rho):
    """Gaussian curvature ``-Psi''/Psi = 8 / cosh(2 rho)^2`` of the surface ``D``."""
    return 8.0 / np.cosh(2.0 * np.asarray(rho, dtype=float)) ** 2


def slice_curvature(z: complex, model: str = "ball", h: float = 1e-4) -> float:
    """Gaussian curvature of a slice at ``z`` from its conformal factor.

    For ``lam^2 |dz|^2`` the curvature is ``-Laplacian(log lam) / lam^2``; the
    Laplacian is taken by a 5-point stencil, so this is an independent check
    of the constant value -4.
    """
    if model == "ball":
        def loglam(w):
            return -math.log(1.0 - abs(w) ** 2)
    elif model == "halfspace":
        def loglam(w):
            return -math.log(2.0 * w.real)
    else:
        raise ValueError(f"unknown model {model!r}")
    lap = (loglam(z + h) + loglam(z - h) + loglam(z + 1j * h) + loglam(z - 1j * h)
           - 4.0 * loglam(z)) / h**2
    return -lap / math.exp(2.0 * loglam(z))


# ---------------------------------------------------------------------------
# surface model


@dataclass(frozen=True)
class SurfaceState:
    """Point and velocity on ``D`` at arc length ``s``."""

    rho: float
    theta: float
    rho_dot: float
    theta_dot: float
    s: float = 0.0

    @property
    def A(self) -> float:
        """Clairaut constant ``Psi(rho)^2 theta_dot``."""
        return 0.25 * math.tanh(2.0 * self.rho) ** 2 * self.theta_dot

    @property
    def energy(self) -> float:
        return self.rho_dot**2 + 0.25 * math.tanh(2.0 * self.rho) ** 2 * self.theta_dot**2

    @classmethod
    def unit_speed(cls, rho: float, theta: float, angle: float) -> "SurfaceState":
        """Unit-speed state leaving ``(rho, theta)`` at ``angle`` from the outward generator."""
        psi = 0.5 * math.tanh(2.0 * rho)
        tdot = math.sin(angle) / psi if math.sin(angle) != 0.0 else 0.0
        return cls(rho, theta, math.cos(angle), tdot)


def _surface_rhs(_s, y):
    rho, _theta, rdot, tdot = y
    t2 = math.tanh(2.0 * rho)
    sech2 = 1.0 / math.cosh(2.0 * rho) ** 2
    return [rdot, tdot, 0.5 * t2 * sech2 * tdot**2, -4.0 * sech2 / t2 * rdot * tdot]


def _axis_event(_s, y):
    return y[0] - AXIS_TOL


_axis_event.terminal = True
_axis_event.direction = -1


def surface_geodesic(init: SurfaceState, length: float, samples: int = 201,
                     rtol: float = 1e-12, atol: float = 1e-13) -> list[SurfaceState]:
    """Integrate the Euler–Lagrange system of ``drho^2 + Psi^2 dtheta^2``.

    ``rho'' = Psi Psi' theta'^2 = tanh(2 rho) sech(2 rho)^2 theta'^2 / 2`` and
    ``(Psi^2 theta')' = 0``. Radial geodesics (``theta_dot = 0``) are returned
    in closed form, passing through the axis onto the opposite generator.

    Returns ``samples`` states equally spaced in arc length on ``[0, length]``.
    """
    if init.rho < 0.0 or not np.isfinite([init.rho, init.theta, init.rho_dot, init.theta_dot]).all():
        raise ValueError("invalid surface state")
    s = np.linspace(0.0, length, samples)
    if init.theta_dot == 0.0:
        rho = init.rho + s * init.rho_dot
        theta = np.where(rho < 0.0, init.theta + math.pi, init.theta)
        rdot = np.where(rho < 0.0, -init.rho_dot, init.rho_dot)
        return [SurfaceState(abs(r), t, rd, 0.0, si) for r, t, rd, si in zip(rho, theta, rdot, s)]
    if init.rho < AXIS_TOL:
        raise SingularChart("surface chart is singular on the axis; use cartesian_geodesic")
    sol = solve_ivp(_surface_rhs, (0.0, length), [init.rho, init.theta, init.rho_dot, init.theta_dot],
                    method="DOP853", t_eval=s, rtol=rtol, atol=atol, events=_axis_event)
    if sol.status == 1:
        raise SingularChart(f"trajectory reached the axis at s = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise NoConvergence(sol.message)
    return [SurfaceState(*row, si) for row, si in zip(sol.y.T, sol.t)]


def surface_return_length(rho0: float, max_length: float = 100.0) -> float:
    """Arc length after which the unit-speed geodesic leaving ``(rho0, 0)`` tangentially
    to the parallel crosses the line through the axis at ``theta = 0`` again
    (reaches ``theta = pi``).
    """
    init = SurfaceState.unit_speed(rho0, 0.0, math.pi / 2)

    def half_turn(_s, y):
        return y[1] - math.pi

    half_turn.terminal = True
    sol = solve_ivp(_surface_rhs, (0.0, max_length), [init.rho, init.theta, init.rho_dot, init.theta_dot],
                    method="DOP853", rtol=1e-11, atol=1e-12, events=half_turn)
    if not sol.t_events[0].size:
        raise NoConvergence(f"no return within length {max_length}")
    return float(sol.t_events[0][0])


def surface_to_cartesian(state: SurfaceState, e1=I, e2=J):
    """Point and velocity in the ball of a surface state on the circle spanned by ``e1, e2``."""
    e1, e2 = as_quat(e1), as_quat(e2)
    c, s = math.cos(state.theta), math.sin(state.theta)
    r = math.tanh(state.rho)
    radial = c * e1 + s * e2
    point = r * radial
    vel = (1.0 - r * r) * state.rho_dot * radial + r * state.theta_dot * (-s * e1 + c * e2)
    return point, vel


# ---------------------------------------------------------------------------
# Cartesian engine


def _killing_fields(points):
    # infinitesimal rotations of the imaginary part, about i, j and k
    p = np.atleast_2d(points)
    out = np.zeros((3,) + p.shape)
    x1, x2, x3 = p[:, 1], p[:, 2], p[:, 3]
    out[0, :, 2], out[0, :, 3] = -x3, x2
    out[1, :, 1], out[1, :, 3] = x3, -x1
    out[2, :, 1], out[2, :, 2] = -x2, x1
    return out


def killing_momentum(points, vels, model: str = "ball") -> np.ndarray:
    """``g(X_a, v)`` for the three rotation fields ``X_a``; constant along geodesics."""
    code = model_code(model)
    p = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.atleast_2d(np.asarray(vels, dtype=float))
    out = np.empty((len(p), 3))
    for a, x in enumerate(_killing_fields(p)):
        plus = kernels.metric_sq(p, np.ascontiguousarray(x + v), code)
        minus = kernels.metric_sq(p, np.ascontiguousarray(x - v), code)
        out[:, a] = 0.25 * (plus - minus)
    return out


@dataclass(frozen=True)
class GeodesicTrace:
    """Arc-length samples of a geodesic with its conserved quantities."""

    s: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    model: str = "ball"

    @property
    def samples(self):
        return list(zip(self.s, self.points, self.velocities))

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def momentum_drift(self) -> float:
        return float(np.max(np.abs(self.momentum - self.momentum[0])))

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def rows(self):
        """``(s, x0..x3, v0..v3, energy, |momentum|)`` per sample."""
        mom = np.linalg.norm(self.momentum, axis=1)
        return np.column_stack([self.s, self.points, self.velocities, self.energy, mom])


def _integrate(w0, v0, t_end, model, t_eval=None, rtol=1e-12, atol=1e-14):
    code = model_code(model)
    accel = kernels.geodesic_accel

    def rhs(_t, y):
        out = np.empty(8)
        out[:4] = y[4:]
        out[4:] = accel(y[:4], y[4:], code)
        return out

    def leaves(_t, y):
        return domain_margin(y[:4], model) - 1e-9

    leaves.terminal = True
    y0 = np.concatenate([w0, v0])
    return solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol,
                     events=leaves)


def cartesian_geodesic(w0, v0, length: float, model: str = "ball", samples: int = 201,
                       rtol: float = 1e-13, atol: float = 1e-15) -> GeodesicTrace:
    """Unit-speed geodesic from ``w0`` in direction ``v0`` over ``[0, length]``.

    Near the boundary the energy reacts to a radial error ``dr`` like
    ``dr / (1 - r)``, hence the tight default tolerances.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    w0, v0 = as_quat(w0), as_quat(v0)
    if domain_margin(w0, model) < START_MARGIN:
        raise DomainViolation(f"start point within {START_MARGIN} of the boundary")
    speed = math.sqrt(kernels.metric_sq(w0[None], v0[None], model_code(model))[0])
    if speed == 0.0:
        raise ValueError("initial velocity must be non-zero")
    v0 = v0 / speed
    s = np.linspace(0.0, length, samples)
    sol = _integrate(w0, v0, length, model, s, rtol, atol)
    if sol.status == 1:
        raise DomainViolation(f"geodesic left the domain at s = {sol.t_events[0][0]:.6g}")
    if not sol.success:
        raise NoConvergence(sol.message)
    pts = np.ascontiguousarray(sol.y[:4].T)
    vel = np.ascontiguousarray(sol.y[4:].T)
    energy = kernels.metric_sq(pts, vel, model_code(model))
    return GeodesicTrace(sol.t, pts, vel, energy, killing_momentum(pts, vel, model), model)


# ---------------------------------------------------------------------------
# distance bounds


def _arc_coefficient(z: complex, model: str) -> float:
    # metric length of a unit-speed sphere arc through x + yI, per radian
    if model == "ball":
        return z.imag / abs(1.0 - z * z)
    return z.imag / (2.0 * abs(z))


def _slice_geodesic(z1: complex, z2: complex, model: str):
    """Parametrized hyperbolic geodesic ``[0, 1] -> C`` from ``z1`` to ``z2``."""
    if model == "halfspace":
        b1, b2 = (z1 - 1) / (z1 + 1), (z2 - 1) / (z2 + 1)
        inner = _slice_geodesic(b1, b2, "ball")

        def half(t):
            b = inner(t)
            return (1 + b) / (1 - b)
        return half
    w = (z2 - z1) / (1 - z1.conjugate() * z2)
    rho = math.atanh(min(abs(w), 1.0 - 1e-16))
    unit = w / abs(w) if abs(w) > 0 else 1.0

    def ball(t):
        u = np.tanh(np.asarray(t) * rho) * unit
        return (u + z1) / (1 + z1.conjugate() * u)
    return ball


def _great_circle(u1, u2):
    """Arc ``[0, 1] -> S`` from unit ``u1`` to ``u2`` and its angle."""
    c = float(np.clip(u1 @ u2, -1.0, 1.0))
    ang = math.acos(c)
    perp = u2 - c * u1
    if norm(perp) < 1e-12:
        # antipodal or equal units: any orthogonal direction gives a shortest arc
        trial = I if abs(u1[1]) < 0.9 else J
        perp = trial - (trial @ u1) * u1
    perp = perp / norm(perp)

    def arc(t):
        a = np.asarray(t)[..., None] * ang
        return np.cos(a) * u1 + np.sin(a) * perp
    return arc, ang


class _Witness:
    """Sphere arc at fixed ``(x, y)`` then slice geodesic, or the reverse order.

    With both legs present each takes half of the parameter interval, so the
    corner is a node of every dyadic refinement. A leg of zero length is
    dropped.
    """

    vectorized = True

    def __init__(self, z1, z2, u1, u2, arc_first, model, slice_leg=True, arc_leg=True):
        self.z1, self.z2, self.u1, self.u2 = z1, z2, u1, u2
        self.legs = []
        arc = _great_circle(u1, u2)[0] if arc_leg else None
        geo = _slice_geodesic(z1, z2, model) if slice_leg else None
        if arc_first:
            if arc_leg:
                self.legs.append(lambda t: self._lift(np.full(len(t), z1), arc(t)))
            if slice_leg:
                self.legs.append(lambda t: self._lift(geo(t), u2))
        else:
            if slice_leg:
                self.legs.append(lambda t: self._lift(geo(t), u1))
            if arc_leg:
                self.legs.append(lambda t: self._lift(np.full(len(t), z2), arc(t)))

    @staticmethod
    def _lift(z, u):
        z = np.asarray(z, dtype=complex)
        u = np.broadcast_to(u, z.shape + (4,))
        out = z.imag[..., None] * u
        out[..., 0] = z.real
        return out

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if len(self.legs) == 1:
            return self.legs[0](t)
        out = np.empty((len(t), 4))
        first = t <= 0.5
        out[first] = self.legs[0](2 * t[first])
        out[~first] = self.legs[1](2 * t[~first] - 1)
        return out


@dataclass(frozen=True)
class DistanceBounds:
    """``lower <= d(q1, q2) <= upper``; ``witness`` is a curve of length ``upper``."""

    lower: float
    upper: float
    witness: Polyline = field(repr=False)

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "witness": [list(map(float, p)) for p in self.witness.points]}


def _units(s1, s2):
    # a real point takes the unit of the other point, so only the slice leg remains
    u1 = None if s1.real_flag else s1.unit
    u2 = None if s2.real_flag else s2.unit
    u1 = u2 if u1 is None else u1
    u2 = u1 if u2 is None else u2
    if u1 is None:
        u1 = u2 = as_quat(I)
    return u1, u2


def bilateral_quantity(q1, q2, model: str = "ball") -> float:
    """``d_hyp(pi q1, pi q2) + min_j (arc coefficient at q_j) * d_S(I1, I2)``."""
    s1, s2 = slice_decompose(q1), slice_decompose(q2)
    u1, u2 = _units(s1, s2)
    coef = min(_arc_coefficient(s1.as_complex(), model), _arc_coefficient(s2.as_complex(), model))
    return slice_distance(q1, q2, model) + coef * sphere_distance(u1, u2)


def _witness_curve(q1, q2, model, arc_first=None):
    """Two-leg curve from ``q1`` to ``q2``; by default the arc runs where it is cheaper."""
    s1, s2 = slice_decompose(q1), slice_decompose(q2)
    z1, z2 = s1.as_complex(), s2.as_complex()
    u1, u2 = _units(s1, s2)
    c1, c2 = _arc_coefficient(z1, model), _arc_coefficient(z2, model)
    if arc_first is None:
        arc_first = c1 <= c2
    arc_leg = sphere_distance(u1, u2) * (c1 if arc_first else c2) > 0.0
    slice_leg = z1 != z2
    if not (arc_leg or slice_leg):
        return None
    return _Witness(z1, z2, u1, u2, arc_first, model, slice_leg, arc_leg)


def distance_bounds(q1, q2, model: str = "ball", rtol: float = 1e-10) -> DistanceBounds:
    """Slice-projection lower bound and two-leg witness upper bound for ``d(q1, q2)``."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    q1, q2 = as_quat(q1), as_quat(q2)
    for q in (q1, q2):
        if domain_margin(q, model) <= 0.0:
            raise DomainViolation(f"{q.tolist()} is not an interior point")
    lower = slice_distance(q1, q2, model)
    curve = _witness_curve(q1, q2, model)
    if curve is None:
        return DistanceBounds(0.0, 0.0, Polyline(q1[None], model))
    witness = Polyline.from_curve(curve, model, n=16)
    return DistanceBounds(lower, curve_length(witness, rtol=rtol), witness)


# ---------------------------------------------------------------------------
# shooting


def _chart_basis(q1, q2):
    """Orthonormal ``(1, e1, e2)`` whose span contains both points."""
    u1, u2 = _units(slice_decompose(q1), slice_decompose(q2))
    e1 = u1
    perp = u2 - (u2 @ e1) * e1
    if norm(perp) < 1e-12:
        trial = as_quat(J) if abs(e1[2]) < 0.9 else as_quat(I)
        perp = trial - (trial @ e1) * e1
    e2 = perp / norm(perp)
    return np.stack([np.array([1.0, 0.0, 0.0, 0.0]), e1, e2])


def shoot_distance(q1, q2, model: str = "ball", budget: int = 200, tol: float = 1e-9,
                   samples: int = 101, relax_start: bool = True):
    """Geodesic length from ``q1`` to ``q2`` by shooting in the 3D chart through both points.

    The unknown is the initial velocity (direction and length) in the span of
    ``1, e1, e2``; the arrival miss is reduced by trust-region least squares
    started from the tangent of a short relaxed polyline (geodesics between
    two points are not unique and the relaxed curve selects the short one),
    then from the first segment of the upper-bound witness and the Euclidean
    chord direction.

    Returns ``(length, trace)``. Raises :class:`NoConvergence` (carrying the
    :class:`DistanceBounds`) when the miss stays above ``tol`` within ``budget``
    trajectory evaluations.
    """
    q1, q2 = as_quat(q1), as_quat(q2)
    for q in (q1, q2):
        if domain_margin(q, model) < START_MARGIN:
            raise DomainViolation(f"{q.tolist()} is within {START_MARGIN} of the boundary")
    bounds = distance_bounds(q1, q2, model)
    if bounds.upper == 0.0:
        trace = GeodesicTrace(np.zeros(1), q1[None], np.zeros((1, 4)), np.zeros(1), np.zeros((1, 3)), model)
        return 0.0, trace
    basis = _chart_basis(q1, q2)
    target = basis @ q2
    code = model_code(model)

    def scaled(d, length):
        speed = math.sqrt(kernels.metric_sq(q1[None], (d @ basis)[None], code)[0])
        return d / speed * length

    # tangent of a relaxed curve, witness first segment, then the Euclidean
    # chord, at a few trial lengths
    starts = []
    if relax_start:
        relaxed = polyline_relax(q1, q2, n=32, model=model)
        starts.append(scaled(basis @ (relaxed.points[1] - q1), relaxed.raw_length()))
    ahead = bounds.witness.curve(np.array([1e-6]))[0]
    mid = 0.5 * (bounds.lower + bounds.upper)
    starts += [scaled(basis @ (ahead - q1), L) for L in (mid, bounds.upper)]
    starts += [scaled(basis @ (q2 - q1), L) for L in (mid, bounds.lower)]

    calls = [0]
    best = [None, math.inf]

    def miss(v):
        calls[0] += 1
        if calls[0] > budget:
            raise _Budget
        sol = _integrate(q1, v @ basis, 1.0, model)
        out = basis @ sol.y[:4, -1] - target
        if sol.status == 1:
            # left the domain early: penalize the unused parameter time
            out = out + (1.0 - sol.t[-1]) * 10.0
        err = float(np.max(np.abs(out)))
        if err < best[1]:
            best[:] = [np.array(v), err]
        return out

    try:
        for x0 in starts:
            least_squares(miss, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                          max_nfev=budget, diff_step=1e-7)
            if best[1] <= tol:
                break
    except _Budget:
        pass
    if best[1] > tol:
        raise NoConvergence(f"shooting miss {best[1]:.2e} above {tol:.1e} within {budget} evaluations",
                            bounds)
    v4 = best[0] @ basis
    length = math.sqrt(kernels.metric_sq(q1[None], v4[None], code)[0])
    trace = cartesian_geodesic(q1, v4, length, model, samples)
    return length, trace


class _Budget(Exception):
    pass


# ---------------------------------------------------------------------------
# curve shortening


_GAUSS_NODES = np.array([0.5 - math.sqrt(0.15), 0.5, 0.5 + math.sqrt(0.15)])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


def _chart_coefficients(x, y, model):
    """Metric ``c1 (dx^2 + dy^2) + f dphi^2`` of the chart ``x + y (cos phi e1 + sin phi e2)``.

    Returns ``c1, f`` and their partial derivatives in ``x`` and ``y``.
    """
    if model == "ball":
        s = 1.0 - x * x - y * y
        c1 = s**-2
        c1x, c1y = 4.0 * x * s**-3, 4.0 * y * s**-3
        m = (1.0 - x * x + y * y) ** 2 + 4.0 * x * x * y * y
        mx, my = -4.0 * x * s, 4.0 * y * (1.0 + x * x + y * y)
        f = y * y / m
        fx, fy = -y * y * mx / m**2, 2.0 * y / m - y * y * my / m**2
    else:
        a = x * x + y * y
        c1 = 0.25 / (x * x)
        c1x, c1y = -0.5 / x**3, np.zeros_like(y)
        f = 0.25 * y * y / a
        fx, fy = -0.5 * x * y * y / a**2, 0.5 * y * x * x / a**2
    return c1, f, c1x, c1y, fx, fy


def _chart_energy(c, model):
    """Energy ``sum_k int_0^1 |dc_k|^2`` of the chart polyline ``c`` (rows x, y, phi) and its gradient."""
    d = np.diff(c, axis=0)
    total = 0.0
    grad = np.zeros_like(c)
    for tau, w in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
        pt = c[:-1] + tau * d
        c1, f, c1x, c1y, fx, fy = _chart_coefficients(pt[:, 0], pt[:, 1], model)
        planar = d[:, 0] ** 2 + d[:, 1] ** 2
        ang = d[:, 2] ** 2
        total += w * float(np.sum(c1 * planar + f * ang))
        gd = 2.0 * np.column_stack([c1 * d[:, 0], c1 * d[:, 1], f * d[:, 2]])
        gx = np.column_stack([c1x * planar + fx * ang, c1y * planar + fy * ang, np.zeros(len(d))])
        grad[1:] += w * (gd + tau * gx)
        grad[:-1] += w * (-gd + (1.0 - tau) * gx)
    return total, grad


def _to_chart(points, basis):
    """Rows ``(x, y, phi)`` with ``phi`` unwrapped along the curve."""
    coords = points @ basis.T
    x = coords[:, 0]
    y = np.hypot(coords[:, 1], coords[:, 2])
    phi = np.unwrap(np.arctan2(coords[:, 2], coords[:, 1]))
    return np.column_stack([x, y, phi])


def _from_chart(c, basis):
    return (c[..., 0:1] * basis[0] + (c[..., 1] * np.cos(c[..., 2]))[..., None] * basis[1]
            + (c[..., 1] * np.sin(c[..., 2]))[..., None] * basis[2])


def _free_to_chart(p, model):
    # unconstrained (p0, p1) -> admissible (x, y)
    if model == "ball":
        s = np.sqrt(1.0 + p[:, 0] ** 2 + p[:, 1] ** 2)
        return np.column_stack([p[:, 0] / s, p[:, 1] / s, p[:, 2]])
    return np.column_stack([np.exp(p[:, 0]), p[:, 1], p[:, 2]])


def _chart_to_free(c, model):
    if model == "ball":
        s = np.sqrt(1.0 - c[:, 0] ** 2 - c[:, 1] ** 2)
        return np.column_stack([c[:, 0] / s, c[:, 1] / s, c[:, 2]])
    return np.column_stack([np.log(c[:, 0]), c[:, 1], c[:, 2]])


def _free_chain(p, c, g, model):
    out = g.copy()
    if model == "ball":
        s = np.sqrt(1.0 + p[:, 0] ** 2 + p[:, 1] ** 2)
        dot = p[:, 0] * g[:, 0] + p[:, 1] * g[:, 1]
        out[:, 0] = g[:, 0] / s - p[:, 0] * dot / s**3
        out[:, 1] = g[:, 1] / s - p[:, 1] * dot / s**3
    else:
        out[:, 0] = g[:, 0] * c[:, 0]
    return out


class _ChartCurve:
    """Piecewise-linear curve in chart coordinates, mapped back to quaternions."""

    vectorized = True

    def __init__(self, nodes, basis):
        self.nodes, self.basis = nodes, basis
        self.t = np.linspace(0.0, 1.0, len(nodes))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        c = np.column_stack([np.interp(t, self.t, self.nodes[:, j]) for j in range(3)])
        return _from_chart(c, self.basis)


def _banded_hessian(grad, x, nv, h=1e-6):
    """Hessian of a nearest-neighbour coupled energy in ``solveh_banded`` upper form.

    Vertices are coloured mod 3, so one pair of gradient differences per
    colour and coordinate fills every 3x3 block.
    """
    size = 3 * nv
    full = np.zeros((size, 11))  # dense band rows: columns k - 5 .. k + 5
    for colour in range(3):
        verts = np.arange(colour, nv, 3)
        for j in range(3):
            idx = 3 * verts + j
            step = h * (1.0 + np.abs(x[idx]))
            xp, xm = x.copy(), x.copy()
            xp[idx] += step
            xm[idx] -= step
            dg = (grad(xp) - grad(xm)).reshape(nv, 3)
            for v in verts:
                col = 3 * v + j
                for w in range(max(v - 1, 0), min(v + 2, nv)):
                    for jj in range(3):
                        row = 3 * w + jj
                        full[row, col - row + 5] = dg[w, jj] / (2.0 * step[verts == v][0])
    # symmetrize and pack the upper triangle
    band = np.zeros((6, size))
    for off in range(6):
        rows = np.arange(size - off)
        band[5 - off, off:] = 0.5 * (full[rows, 5 + off] + full[rows + off, 5 - off])
    return band


def _relax_from(start, model, maxiter, rtol):
    """Damped Newton on the chart energy; returns ``(converged, nodes)``."""
    n = len(start) - 1
    ends = start[[0, -1]]
    nv = n - 1

    def full(x):
        inner = _free_to_chart(x.reshape(nv, 3), model)
        return np.vstack([ends[:1], inner, ends[1:]]), inner

    def fun(x):
        c, inner = full(x)
        e, g = _chart_energy(c, model)
        return e, _free_chain(x.reshape(nv, 3), inner, g[1:-1], model).ravel()

    x = _chart_to_free(start[1:-1], model).ravel()
    e, g = fun(x)
    lam = 0.0
    for _ in range(maxiter):
        band = _banded_hessian(lambda y: fun(y)[1], x, nv)
        scale = float(np.max(np.abs(band[5])))
        while True:
            damped = band.copy()
            damped[5] += lam * scale
            try:
                step = solveh_banded(damped, -g)
            except LinAlgError:
                lam = max(4.0 * lam, 1e-10)
                continue
            break
        # backtracking
        t = 1.0
        while t > 1e-12:
            e_new, g_new = fun(x + t * step)
            if np.isfinite(e_new) and e_new <= e + 1e-4 * t * float(g @ step):
                break
            t *= 0.5
        else:
            return e_new <= e, full(x)[0]
        improvement = (e - e_new) / e
        x, e, g = x + t * step, e_new, g_new
        lam = lam * 0.25 if t == 1.0 else max(4.0 * lam, 1e-10)
        if improvement < rtol * 1e-4:
            return True, full(x)[0]
    return False, full(x)[0]


def polyline_relax(q1, q2, n: int = 64, model: str = "ball", maxiter: int = 200,
                   rtol: float = 1e-8) -> Polyline:
    """Shorten curves from ``q1`` to ``q2`` with the endpoints fixed; return the shortest.

    Curves live in the 3D chart ``x + y (cos phi e1 + sin phi e2)`` through
    both points, where the metric is diagonal and a sphere arc at fixed
    ``(x, y)`` is a straight segment. Interior vertices of an ``n``-segment
    chart polyline minimize the energy ``sum_k int |dc_k|^2`` (3-point Gauss
    per segment; equal spacing at the optimum, no degenerate segments) by
    damped Newton steps with a banded Hessian, on coordinates that keep every
    vertex inside the domain. Because
    geodesics are not unique the descent starts from the chart chord and from
    both two-leg witness curves. The returned polyline carries the chart curve,
    so :func:`~qhgeo.metric.curve_length` measures it exactly, and it is never
    longer than the chord.
    """
    q1, q2 = as_quat(q1), as_quat(q2)
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    for q in (q1, q2):
        if domain_margin(q, model) <= 0.0:
            raise DomainViolation(f"{q.tolist()} is not an interior point")
    if n < 2:
        raise ValueError("n must be at least 2")
    if np.array_equal(q1, q2):
        return Polyline(q1[None], model)
    basis = _chart_basis(q1, q2)
    t = np.linspace(0.0, 1.0, n + 1)
    c1, c2 = _to_chart(np.stack([q1, q2]), basis)
    chord = c1 + t[:, None] * (c2 - c1)
    starts = [chord]
    for arc_first in (True, False):
        curve = _witness_curve(q1, q2, model, arc_first)
        if curve is not None:
            starts.append(_to_chart(np.asarray(curve(t), dtype=float), basis))

    def as_polyline(nodes):
        curve = _ChartCurve(nodes, basis)
        return Polyline(curve(t), model, curve, t)

    best = as_polyline(chord)
    best_len = curve_length(best)
    for start in starts:
        # keep the angle path of each start, but pin its ends to the same branch as the chord
        start = start + (c1[2] - start[0, 2]) * np.array([0.0, 0.0, 1.0])
        converged, nodes = _relax_from(start, model, maxiter, rtol)
        if not converged:
            raise NoConvergence(f"curve shortening hit {maxiter} iterations", best)
        cand = as_polyline(nodes)
        cand_len = curve_length(cand)
        if cand_len < best_len:
            best, best_len = cand, cand_len
    return best
