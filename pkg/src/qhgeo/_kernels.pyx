# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    BALL = 0


cdef inline void _qmul(const double* a, const double* b, double* out) noexcept nogil:
    cdef double o0 = a[0]*b[0] - a[1]*b[1] - a[2]*b[2] - a[3]*b[3]
    cdef double o1 = a[0]*b[1] + a[1]*b[0] + a[2]*b[3] - a[3]*b[2]
    cdef double o2 = a[0]*b[2] - a[1]*b[3] + a[2]*b[0] + a[3]*b[1]
    cdef double o3 = a[0]*b[3] + a[1]*b[2] - a[2]*b[1] + a[3]*b[0]
    out[0] = o0
    out[1] = o1
    out[2] = o2
    out[3] = o3


def qmul_batch(p, q):
    cdef const double[:, ::1] pa = np.ascontiguousarray(np.atleast_2d(p), dtype=np.float64)
    cdef const double[:, ::1] qa = np.ascontiguousarray(np.atleast_2d(q), dtype=np.float64)
    cdef Py_ssize_t n = max(pa.shape[0], qa.shape[0])
    cdef Py_ssize_t sp = 0 if pa.shape[0] == 1 else 1
    cdef Py_ssize_t sq = 0 if qa.shape[0] == 1 else 1
    out = np.empty((n, 4))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t r
    with nogil:
        for r in range(n):
            _qmul(&pa[r * sp, 0], &qa[r * sq, 0], &o[r, 0])
    if np.ndim(p) == 1 and np.ndim(q) == 1:
        return out[0]
    return out


def series_eval(coeffs, points):
    cdef const double[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    pts_arr = np.ascontiguousarray(points, dtype=np.float64)
    single = pts_arr.ndim == 1
    cdef const double[:, ::1] pts = np.atleast_2d(pts_arr)
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t nc = c.shape[0]
    out = np.empty((m, 4))
    cdef double[:, ::1] o = out
    cdef double acc[4]
    cdef Py_ssize_t r, n, l
    with nogil:
        for r in range(m):
            for l in range(4):
                acc[l] = c[nc - 1, l]
            for n in range(nc - 2, -1, -1):
                _qmul(&pts[r, 0], acc, acc)
                for l in range(4):
                    acc[l] += c[n, l]
            for l in range(4):
                o[r, l] = acc[l]
    return out[0] if single else out


def star_convolve(a, b):
    cdef const double[:, ::1] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = aa.shape[0], nb = bb.shape[0]
    out = np.zeros((na + nb - 1, 4))
    cdef double[:, ::1] o = out
    cdef double t[4]
    cdef Py_ssize_t i, j, l
    with nogil:
        for i in range(na):
            for j in range(nb):
                _qmul(&aa[i, 0], &bb[j, 0], t)
                for l in range(4):
                    o[i + j, l] += t[l]
    return out


cdef inline void _coefficients(const double* w, int model, double* c2, double* k, double* y2) noexcept nogil:
    cdef double x0 = w[0]
    cdef double yy = w[1]*w[1] + w[2]*w[2] + w[3]*w[3]
    cdef double a = x0*x0 + yy
    cdef double m
    if model == BALL:
        m = (1.0 - x0*x0 + yy) * (1.0 - x0*x0 + yy) + 4.0*x0*x0*yy
        c2[0] = 1.0 / m
        k[0] = 4.0 / ((1.0 - a) * (1.0 - a) * m)
    else:
        c2[0] = 1.0 / (4.0 * a)
        k[0] = 1.0 / (4.0 * x0 * x0 * a)
    y2[0] = yy


cdef inline double _metric_sq(const double* w, const double* d, int model) noexcept nogil:
    cdef double c2, k, y2
    _coefficients(w, model, &c2, &k, &y2)
    cdef double ud = w[1]*d[1] + w[2]*d[2] + w[3]*d[3]
    cdef double dd = d[0]*d[0] + d[1]*d[1] + d[2]*d[2] + d[3]*d[3]
    return c2 * dd + k * (y2 * d[0] * d[0] + ud * ud)


cdef inline void _gram_apply(const double* w, const double* d, int model, double* out) noexcept nogil:
    cdef double c2, k, y2
    _coefficients(w, model, &c2, &k, &y2)
    cdef double ud = w[1]*d[1] + w[2]*d[2] + w[3]*d[3]
    out[0] = c2 * d[0] + k * y2 * d[0]
    out[1] = c2 * d[1] + k * ud * w[1]
    out[2] = c2 * d[2] + k * ud * w[2]
    out[3] = c2 * d[3] + k * ud * w[3]


def metric_sq(points, vecs, int model):
    p_arr = np.ascontiguousarray(points, dtype=np.float64)
    single = p_arr.ndim == 1
    cdef const double[:, ::1] p = np.atleast_2d(p_arr)
    cdef const double[:, ::1] d = np.ascontiguousarray(np.broadcast_to(np.atleast_2d(vecs), (p.shape[0], 4)), dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], r
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for r in range(n):
            o[r] = _metric_sq(&p[r, 0], &d[r, 0], model)
    return out[0] if single else out


def polyline_length(points, int model):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], r, l
    cdef double mid[4]
    cdef double dl[4]
    cdef double total = 0.0
    with nogil:
        for r in range(n - 1):
            for l in range(4):
                mid[l] = 0.5 * (p[r + 1, l] + p[r, l])
                dl[l] = p[r + 1, l] - p[r, l]
            total += sqrt(_metric_sq(mid, dl, model))
    return total


def polyline_length_grad(points, int model, double h=1e-6):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], r, l
    grad_arr = np.zeros((n, 4))
    cdef double[:, ::1] grad = grad_arr
    cdef double mid[4]
    cdef double dl[4]
    cdef double gd[4]
    cdef double gm[4]
    cdef double seg, save, qp, qm
    cdef double total = 0.0
    with nogil:
        for r in range(n - 1):
            for l in range(4):
                mid[l] = 0.5 * (p[r + 1, l] + p[r, l])
                dl[l] = p[r + 1, l] - p[r, l]
            seg = sqrt(_metric_sq(mid, dl, model))
            total += seg
            _gram_apply(mid, dl, model, gd)
            for l in range(4):
                save = mid[l]
                mid[l] = save + h
                qp = _metric_sq(mid, dl, model)
                mid[l] = save - h
                qm = _metric_sq(mid, dl, model)
                mid[l] = save
                gm[l] = (qp - qm) / (2.0 * h) / (4.0 * seg)
            for l in range(4):
                grad[r + 1, l] += gd[l] / seg + gm[l]
                grad[r, l] += -gd[l] / seg + gm[l]
    return total, grad_arr


cdef inline void _dgram(const double* x, const double* v, int model, double[4][4] dg,
                        double* pc, double* qc) noexcept nogil:
    # dg[c] = d_c(G) v in closed form, with G = c2 Id + k Q and
    # Q v = (y^2 v0, (u.v) u), u = Im x; also returns the coefficients of
    # G^{-1} = pc P + qc (Id - P), P the projection on span(1, Im x)
    cdef double dc2[4]
    cdef double dk[4]
    cdef double qv[4]
    cdef double x0, y2, a, sv, t, m, c2, k, uv
    cdef Py_ssize_t l, c
    x0 = x[0]
    y2 = x[1]*x[1] + x[2]*x[2] + x[3]*x[3]
    a = x0*x0 + y2
    if model == BALL:
        sv = 1.0 - a
        t = sv + 2.0*y2
        m = t*t + 4.0*x0*x0*y2
        c2 = 1.0 / m
        k = 4.0 / (sv * sv * m)
        # dm/dx0 = -4 x0 s, dm/dx_c = 4 x_c (1 + a); ds/dx_c = -2 x_c
        dc2[0] = 4.0 * x0 * sv * c2 * c2
        dk[0] = k * (4.0 * x0 / sv + 4.0 * x0 * sv / m)
        for c in range(1, 4):
            dc2[c] = -4.0 * x[c] * (1.0 + a) * c2 * c2
            dk[c] = k * (4.0 * x[c] / sv - 4.0 * x[c] * (1.0 + a) / m)
        pc[0] = sv * sv
        qc[0] = m
    else:
        c2 = 1.0 / (4.0 * a)
        k = 1.0 / (4.0 * x0 * x0 * a)
        for c in range(4):
            dc2[c] = -2.0 * x[c] * c2 / a
            dk[c] = -k * 2.0 * x[c] / a
        dk[0] -= k * 2.0 / x0
        pc[0] = 4.0 * x0 * x0
        qc[0] = 4.0 * a
    uv = x[1]*v[1] + x[2]*v[2] + x[3]*v[3]
    qv[0] = y2 * v[0]
    for l in range(1, 4):
        qv[l] = uv * x[l]
    for c in range(4):
        for l in range(4):
            dg[c][l] = dc2[c] * v[l] + dk[c] * qv[l]
    for c in range(1, 4):
        dg[c][0] += k * 2.0 * x[c] * v[0]
        for l in range(1, 4):
            dg[c][l] += k * v[c] * x[l]
        dg[c][c] += k * uv


def geodesic_accel(x, v, int model):
    cdef const double[::1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] va = np.ascontiguousarray(v, dtype=np.float64)
    out = np.zeros(4)
    cdef double[::1] o = out
    cdef double dg[4][4]
    cdef double b[4]
    cdef double y2, ub, pc, qc
    cdef Py_ssize_t l, c
    with nogil:
        _dgram(&xa[0], &va[0], model, dg, &pc, &qc)
        # b = (D_v G) v - grad(v^T G v) / 2
        for l in range(4):
            b[l] = 0.0
            for c in range(4):
                b[l] += va[c] * dg[c][l] - 0.5 * dg[l][c] * va[c]
        y2 = xa[1]*xa[1] + xa[2]*xa[2] + xa[3]*xa[3]
        o[0] = -pc * b[0]
        ub = xa[1]*b[1] + xa[2]*b[2] + xa[3]*b[3]
        for l in range(1, 4):
            if y2 > 0.0:
                o[l] = -(qc * (b[l] - ub * xa[l] / y2) + pc * ub * xa[l] / y2)
            else:
                o[l] = -qc * b[l]
    return out
