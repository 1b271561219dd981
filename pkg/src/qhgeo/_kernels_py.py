"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` function for function and are used whenever the
compiled extension is unavailable (or ``QHGEO_PURE_PYTHON=1`` is set).

Model codes: 0 = unit ball with metric g, 1 = right half-space with metric h.
"""

import math

import numpy as np

from .quat import mul

BALL = 0
HALFSPACE = 1


def qmul_batch(p, q):
    return mul(p, q)


def series_eval(coeffs, points):
    """Evaluate ``sum q^n a_n`` at each row of ``points`` (right-coefficient Horner)."""
    coeffs = np.asarray(coeffs, dtype=float)
    points = np.asarray(points, dtype=float)
    acc = np.broadcast_to(coeffs[-1], points.shape).copy()
    for a in coeffs[-2::-1]:
        acc = mul(points, acc) + a
    return acc


def star_convolve(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros((len(a) + len(b) - 1, 4))
    for k in range(len(a)):
        out[k:k + len(b)] += mul(a[k], b)
    return out


def _coefficients(w, model):
    """Return ``(c2, k)`` with gram = c2 Id + k (y^2 e0 e0^T + u u^T), u = Im w."""
    x0 = w[..., 0]
    y2 = w[..., 1] ** 2 + w[..., 2] ** 2 + w[..., 3] ** 2
    a = x0 * x0 + y2
    if model == BALL:
        m = (1.0 - x0 * x0 + y2) ** 2 + 4.0 * x0 * x0 * y2
        c2 = 1.0 / m
        k = 4.0 / ((1.0 - a) ** 2 * m)
    else:
        c2 = 1.0 / (4.0 * a)
        k = 1.0 / (4.0 * x0 * x0 * a)
    return c2, k, y2


def metric_sq(points, vecs, model):
    """Squared metric length ``|d|^2`` of each tangent vector at each point."""
    w = np.asarray(points, dtype=float)
    d = np.asarray(vecs, dtype=float)
    c2, k, y2 = _coefficients(w, model)
    ud = np.einsum("...i,...i->...", w[..., 1:], d[..., 1:])
    dd = np.einsum("...i,...i->...", d, d)
    return c2 * dd + k * (y2 * d[..., 0] ** 2 + ud * ud)


def polyline_length(points, model):
    p = np.asarray(points, dtype=float)
    if len(p) < 2:
        return 0.0
    delta = np.diff(p, axis=0)
    mid = 0.5 * (p[1:] + p[:-1])
    return float(np.sqrt(metric_sq(mid, delta, model)).sum())


def polyline_length_grad(points, model, h=1e-6):
    """Discrete length and its gradient with respect to every vertex."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    grad = np.zeros_like(p)
    if n < 2:
        return 0.0, grad
    delta = np.diff(p, axis=0)
    mid = 0.5 * (p[1:] + p[:-1])
    seg = np.sqrt(metric_sq(mid, delta, model))
    gd = _gram_apply(mid, delta, model) / seg[:, None]
    gm = np.empty_like(mid)
    for l in range(4):
        e = np.zeros(4)
        e[l] = h
        gm[:, l] = (metric_sq(mid + e, delta, model) - metric_sq(mid - e, delta, model)) / (2 * h)
    gm /= 4.0 * seg[:, None]
    grad[1:] += gd + gm
    grad[:-1] += -gd + gm
    return float(seg.sum()), grad


def _dgram(x, v, model):
    """``dg[..., c, :] = d_c(G) v`` in closed form.

    The gram field is ``c2 Id + k Q`` with ``Q v = (y^2 v0, (u.v) u)``,
    ``u = Im x``; only the scalar coefficients ``c2, k`` need differentiating.
    """
    x0, u = x[..., 0], x[..., 1:]
    y2 = np.einsum("...i,...i->...", u, u)
    a = x0 * x0 + y2
    if model == BALL:
        s = 1.0 - a
        m = (s + 2.0 * y2) ** 2 + 4.0 * x0 * x0 * y2
        c2, k = 1.0 / m, 4.0 / (s * s * m)
        dm = 4.0 * x * (1.0 + a)[..., None]
        dm[..., 0] = -4.0 * x0 * s
        dc2 = -dm * (c2 * c2)[..., None]
        dk = k[..., None] * (4.0 * x / s[..., None] - dm / m[..., None])
    else:
        c2, k = 1.0 / (4.0 * a), 1.0 / (4.0 * x0 * x0 * a)
        dc2 = -2.0 * x * (c2 / a)[..., None]
        dk = -2.0 * x * (k / a)[..., None]
        dk[..., 0] -= k * 2.0 / x0
    uv = np.einsum("...i,...i->...", u, v[..., 1:])
    qv = np.concatenate([(y2 * v[..., 0])[..., None], uv[..., None] * u], axis=-1)
    dg = dc2[..., :, None] * v[..., None, :] + dk[..., :, None] * qv[..., None, :]
    dg[..., 1:, 0] += 2.0 * k[..., None] * u * v[..., 0:1]
    dg[..., 1:, 1:] += k[..., None, None] * (v[..., 1:, None] * u[..., None, :]
                                             + uv[..., None, None] * np.eye(3))
    return dg


def _gram_apply(w, d, model, s=None):
    # ``s`` optionally supplies 1 - |w|^2 for the ball
    c2, k, y2 = _coefficients(w, model)
    if s is not None and model == BALL:
        m = (s + 2.0 * y2) ** 2 + 4.0 * w[..., 0] ** 2 * y2
        c2, k = 1.0 / m, 4.0 / (s * s * m)
    ud = np.einsum("...i,...i->...", w[..., 1:], d[..., 1:])
    out = c2[..., None] * d
    out[..., 0] += k * y2 * d[..., 0]
    out[..., 1:] += (k * ud)[..., None] * w[..., 1:]
    return out


def _gram_inv_apply(w, b, model, s):
    # G^{-1} = pc P + qc (Id - P), P the projection on span(1, Im w)
    x0 = float(w[0])
    y2 = float(w[1:] @ w[1:])
    if model == BALL:
        pc, qc = s * s, (s + 2.0 * y2) ** 2 + 4.0 * x0 * x0 * y2
    else:
        pc, qc = 4.0 * x0 * x0, 4.0 * (x0 * x0 + y2)
    out = qc * b
    out[0] = pc * b[0]
    if y2 > 0.0:
        along = float(w[1:] @ b[1:]) / y2 * w[1:]
        out[1:] += (pc - qc) * along
    return out


_STENCIL = np.array([-2.0, -1.0, 1.0, 2.0])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def fd_step(x, model, h=1e-5):
    """Power-of-two difference step ``<= h * min(1, distance to the boundary)``.

    The Gram field varies on the scale of the boundary distance; a power of
    two keeps ``x +- k h`` exact for ``|x| < 1`` so the stencil stays symmetric.
    """
    scale = 1.0 - float(np.sqrt(x @ x)) if model == 0 else float(x[0])
    return math.ldexp(1.0, math.frexp(h * min(1.0, scale))[1] - 1)


def geodesic_accel(x, v, model):
    """Geodesic acceleration ``-Gamma(v, v)`` from the closed-form gram derivatives.

    Scalar arithmetic on python floats: the integrator calls this once per
    stage, where per-array numpy overhead would dominate.
    """
    x0, x1, x2, x3 = (float(t) for t in x)
    v0, v1, v2, v3 = (float(t) for t in v)
    u, vu = (x1, x2, x3), (v1, v2, v3)
    y2 = x1 * x1 + x2 * x2 + x3 * x3
    a = x0 * x0 + y2
    xs = (x0, x1, x2, x3)
    if model == BALL:
        sv = 1.0 - a
        t = sv + 2.0 * y2
        m = t * t + 4.0 * x0 * x0 * y2
        c2, k = 1.0 / m, 4.0 / (sv * sv * m)
        dc2 = [-4.0 * xc * (1.0 + a) * c2 * c2 for xc in xs]
        dk = [k * (4.0 * xc / sv - 4.0 * xc * (1.0 + a) / m) for xc in xs]
        dc2[0] = 4.0 * x0 * sv * c2 * c2
        dk[0] = k * (4.0 * x0 / sv + 4.0 * x0 * sv / m)
        pc, qc = sv * sv, m
    else:
        c2, k = 1.0 / (4.0 * a), 1.0 / (4.0 * x0 * x0 * a)
        dc2 = [-2.0 * xc * c2 / a for xc in xs]
        dk = [-k * 2.0 * xc / a for xc in xs]
        dk[0] -= k * 2.0 / x0
        pc, qc = 4.0 * x0 * x0, 4.0 * a
    uv = x1 * v1 + x2 * v2 + x3 * v3
    vs = (v0, v1, v2, v3)
    qv = (y2 * v0, uv * x1, uv * x2, uv * x3)
    vv = v0 * v0 + v1 * v1 + v2 * v2 + v3 * v3
    vqv = y2 * v0 * v0 + uv * uv
    # (D_v G) v: derivatives of c2 and k along v, plus k times (D_v Q) v
    dc2v = sum(d * w for d, w in zip(dc2, vs))
    dkv = sum(d * w for d, w in zip(dk, vs))
    uvu = x1 * v1 + x2 * v2 + x3 * v3
    vuvu = v1 * v1 + v2 * v2 + v3 * v3
    dqv = [2.0 * uvu * v0] + [vuvu * uc + uvu * vc for uc, vc in zip(u, vu)]
    # grad(v^T G v) = grad(c2) |v|^2 + grad(k) v^T Q v + k grad(v^T Q v)
    gq = [0.0] + [2.0 * uc * v0 * v0 + 2.0 * uv * vc for uc, vc in zip(u, vu)]
    b = [dc2v * vs[l] + dkv * qv[l] + k * dqv[l]
         - 0.5 * (dc2[l] * vv + dk[l] * vqv + k * gq[l]) for l in range(4)]
    ub = x1 * b[1] + x2 * b[2] + x3 * b[3]
    out = [-pc * b[0]]
    for l in range(1, 4):
        if y2 > 0.0:
            along = ub * xs[l] / y2
            out.append(-(qc * (b[l] - along) + pc * along))
        else:
            out.append(-qc * b[l])
    return np.array(out)


def geodesic_accel_fd(x, v, model, h=1e-5):
    """Geodesic acceleration from 4th-order finite differences of the gram field (cross-check)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not v.any():
        return np.zeros(4)
    h = fd_step(x, model, h)
    s0 = 1.0 - float(x @ x)
    # dg[l] = d_l(G) v, from coordinate stencils only; 1 - |pt|^2 is updated
    # from s0 rather than recomputed with cancellation
    dg = np.empty((4, 4))
    vv = np.broadcast_to(v, (4, 4))
    for l in range(4):
        pts = np.repeat(x[None, :], 4, axis=0)
        dl = _STENCIL * h
        pts[:, l] += dl
        dg[l] = _WEIGHTS @ _gram_apply(pts, vv, model, s0 - (2.0 * x[l] + dl) * dl) / h
    b = v @ dg - 0.5 * (dg @ v)
    return -_gram_inv_apply(x, b, model, s0)
