"""Quadrature rules shared by the boundary-integral and Laplace code.

Gauss–Legendre nodes come from :func:`numpy.polynomial.legendre.leggauss` and
sphere rules from :func:`scipy.integrate.lebedev_rule`; this module only maps
them onto the intervals and the sphere of imaginary units we integrate over.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import lebedev_rule

__all__ = ["gauss_legendre", "composite_gauss_legendre", "graded_breaks", "sphere_rule",
           "LADDER"]

#: (Gauss–Legendre nodes, Lebedev degree) per refinement level
LADDER = ((64, 7), (128, 11), (192, 17), (256, 23), (384, 31))


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """Nodes and weights of the ``n``-point rule on ``[a, b]``."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(breaks, n: int):
    """Concatenated ``n``-point rules on consecutive panels ``[breaks[i], breaks[i+1]]``."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _leggauss(n)
    half = 0.5 * np.diff(breaks)
    nodes = breaks[:-1, None] + half[:, None] * (x[None, :] + 1.0)
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(a: float, b: float, scale: float, ratio: float = 4.0, base: int = 8):
    """Panel breaks on ``[a, b]`` refined geometrically towards both endpoints.

    Panels next to each endpoint start at width ``scale / ratio`` and grow by
    ``ratio`` until they reach the uniform width ``(b - a) / base``.
    """
    width = (b - a) / base
    steps = []
    h = scale / ratio
    while h < width:
        steps.append(h)
        h *= ratio
    steps = np.asarray(steps)
    uniform = np.linspace(a + width, b - width, base - 1)
    return np.unique(np.concatenate(([a], a + steps, uniform, b - steps, [b])))


@lru_cache(maxsize=16)
def _lebedev(degree: int):
    x, w = lebedev_rule(degree)
    units = np.zeros((x.shape[1], 4))
    units[:, 1:] = x.T
    units.flags.writeable = False
    w = np.asarray(w)
    w.flags.writeable = False
    return units, w


def sphere_rule(degree: int):
    """Lebedev nodes on the sphere of imaginary units as quaternions, weights summing to 4π."""
    return _lebedev(degree)
