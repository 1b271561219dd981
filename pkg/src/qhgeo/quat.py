"""Quaternion algebra on plain numpy arrays.

A quaternion ``q = x0 + x1 i + x2 j + x3 k`` is a float array of shape ``(4,)``;
every arithmetic helper here broadcasts over leading axes, so a stack of
quaternions is simply an array of shape ``(..., 4)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ONE", "I", "J", "K", "ZERO",
    "quat", "as_quat", "mul", "conj", "norm", "norm2", "inv", "conj_norm_inv",
    "real", "imag", "dot", "canonical_unit", "SlicePoint", "slice_decompose",
    "polar", "from_polar", "TangentSplit", "tangent_split", "sphere_distance",
    "to_json", "from_json", "real_threshold",
]


def _const(*xs):
    a = np.array(xs, dtype=float)
    a.flags.writeable = False
    return a


ZERO = _const(0, 0, 0, 0)
ONE = _const(1, 0, 0, 0)
I = _const(0, 1, 0, 0)
J = _const(0, 0, 1, 0)
K = _const(0, 0, 0, 1)

#: unit returned for points on the real axis, where the slice is not determined
DESIGNATED_UNIT = I


def quat(x0=0.0, x1=0.0, x2=0.0, x3=0.0) -> np.ndarray:
    return np.array([x0, x1, x2, x3], dtype=float)


def as_quat(q) -> np.ndarray:
    """Coerce a real number or a length-4 sequence to a quaternion array."""
    if np.isscalar(q):
        return np.array([float(q), 0.0, 0.0, 0.0])
    a = np.asarray(q, dtype=float)
    if a.shape[-1] != 4:
        raise ValueError(f"expected trailing dimension 4, got shape {a.shape}")
    return a


def mul(p, q) -> np.ndarray:
    """Hamilton product ``p q`` (``ij = k, jk = i, ki = j``)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.ndim == 1 and q.ndim == 1:
        # single quaternions: python floats avoid per-component array overhead
        a0, a1, a2, a3 = p.tolist()
        b0, b1, b2, b3 = q.tolist()
        return np.array([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    a0, a1, a2, a3 = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    b0, b1, b2, b3 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape))
    out[..., 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
    out[..., 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
    out[..., 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
    out[..., 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    return out


_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def conj(q) -> np.ndarray:
    return np.asarray(q, dtype=float) * _CONJ


def norm2(q):
    q = np.asarray(q, dtype=float)
    return np.einsum("...i,...i->...", q, q)


def norm(q):
    return np.sqrt(norm2(q))


def dot(p, q):
    """Euclidean inner product on R^4."""
    return np.einsum("...i,...i->...", np.asarray(p, dtype=float), np.asarray(q, dtype=float))


def inv(q) -> np.ndarray:
    n2 = norm2(q)
    if np.any(n2 == 0.0):
        raise ZeroDivisionError("quaternion inverse of 0")
    return conj(q) / np.asarray(n2)[..., None]


def conj_norm_inv(q):
    """Return ``(conj(q), |q|, q^-1)``; raises ZeroDivisionError for ``q = 0``."""
    q = as_quat(q)
    return conj(q), float(norm(q)), inv(q)


def real(q):
    return np.asarray(q, dtype=float)[..., 0]


def imag(q) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[..., 0] = 0.0
    return q


def real_threshold(q) -> float:
    return 1e-12 * (1.0 + float(norm(q)))


def canonical_unit(unit) -> np.ndarray:
    """Representative of the slice ``L_I = L_{-I}``: first nonzero imaginary component positive."""
    u = np.array(unit, dtype=float)
    for c in u[1:]:
        if c != 0.0:
            return u if c > 0 else -u
    return u


@dataclass(frozen=True)
class SlicePoint:
    """``q = x + y I`` with ``y >= 0``; ``real_flag`` marks points on the real axis."""

    x: float
    y: float
    unit: np.ndarray
    real_flag: bool = False

    @property
    def slice_unit(self) -> np.ndarray:
        return canonical_unit(self.unit)

    def to_quaternion(self) -> np.ndarray:
        q = self.y * self.unit
        q[0] += self.x
        return q

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


def slice_decompose(q, eps: float | None = None) -> SlicePoint:
    q = as_quat(q)
    x = float(q[0])
    v = q[1:]
    y = math.sqrt(float(v @ v))
    if eps is None:
        eps = real_threshold(q)
    if y < eps:
        return SlicePoint(x, 0.0, DESIGNATED_UNIT.copy(), True)
    unit = np.concatenate(([0.0], v / y))
    return SlicePoint(x, y, unit, False)


def polar(q):
    """``q = r (cos t + sin t I)`` with ``t`` in ``[0, pi]``; returns ``(r, t, I)``."""
    sp = slice_decompose(q)
    r = math.hypot(sp.x, sp.y)
    t = math.atan2(sp.y, sp.x) if r > 0 else 0.0
    return r, t, sp.unit


def from_polar(r: float, t: float, unit) -> np.ndarray:
    q = r * math.sin(t) * np.asarray(unit, dtype=float)
    q[0] = r * math.cos(t)
    return q


class TangentSplit(NamedTuple):
    d1: np.ndarray
    d2: np.ndarray


def tangent_split(w, d) -> TangentSplit:
    """Split ``d`` into its part in ``span{1, I_w}`` and the Euclidean complement.

    ``w`` may be a quaternion or an already decomposed :class:`SlicePoint`.
    On the real axis the designated unit is used; the metric code never
    depends on that choice because both coefficients coincide there.
    """
    sp = w if isinstance(w, SlicePoint) else slice_decompose(w)
    d = as_quat(d)
    u = sp.unit
    d1 = d[0] * ONE + float(d @ u) * u
    return TangentSplit(d1, d - d1)


def sphere_distance(unit1, unit2) -> float:
    a = np.asarray(unit1, dtype=float)[1:]
    b = np.asarray(unit2, dtype=float)[1:]
    c = float(a @ b) / math.sqrt(float(a @ a) * float(b @ b))
    return math.acos(min(1.0, max(-1.0, c)))


def to_json(q) -> list:
    return [float(x) for x in np.asarray(q, dtype=float).reshape(4)]


def from_json(obj) -> np.ndarray:
    if isinstance(obj, (int, float)):
        return as_quat(obj)
    a = np.asarray(obj, dtype=float)
    if a.shape != (4,):
        raise ValueError(f"quaternion must be a JSON array of 4 numbers, got {obj!r}")
    return a
