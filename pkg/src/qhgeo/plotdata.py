"""CSV tables for plotting: curvature, metric coefficients, geodesic traces, return lengths.

Every emitter returns the CSV text (header line first); no plotting is done here.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .errors import UnknownSelector
from .geodesics import cartesian_geodesic, surface_curvature, surface_return_length
from .metric import metric_coefficients
from .quat import as_quat

TRACE_COLUMNS = ("s", "x0", "x1", "x2", "x3", "v0", "v1", "v2", "v3", "energy", "momentum")


def to_csv(header, rows) -> str:
    """CSV text with floats in shortest round-trip form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def trace_csv(trace) -> str:
    return to_csv(TRACE_COLUMNS, trace.rows())


def curvature_profile(rho_min=0.0, rho_max=3.0, points=100):
    """``(rho, K(rho))`` for the Gaussian curvature of the surface ``D``."""
    rho = np.linspace(float(rho_min), float(rho_max), int(points))
    return ("rho", "K"), np.column_stack([rho, surface_curvature(rho)])


def metric_coefficient_table(model="ball", angle=0.0, unit=(0.0, 1.0, 0.0, 0.0), smin=None,
                             smax=None, points=100):
    """``(c1, c2)`` along the ray ``s (cos angle + sin angle I)``.

    ``angle = 0`` is the real axis, where the two coefficients coincide.
    In the ball ``s`` runs over ``[0, 0.95]``, in the half-space over ``[0.05, 3]``.
    """
    unit = as_quat(unit)
    unit = unit / np.linalg.norm(unit)
    if model == "ball":
        smin = 0.0 if smin is None else smin
        smax = 0.95 if smax is None else smax
    elif model == "halfspace":
        if math.cos(angle) <= 0.0:
            raise ValueError("half-space rays need |angle| < pi/2")
        smin = 0.05 if smin is None else smin
        smax = 3.0 if smax is None else smax
    else:
        raise ValueError(f"unknown model {model!r}")
    rows = []
    for s in np.linspace(float(smin), float(smax), int(points)):
        q = s * (math.cos(angle) * np.array([1.0, 0.0, 0.0, 0.0]) + math.sin(angle) * unit)
        rows.append([s, *q, *metric_coefficients(q, model)])
    return ("s", "x0", "x1", "x2", "x3", "c1", "c2"), rows


def geodesic_trace(model="ball", start=(0.0, 0.0, 0.0, 0.0), direction=(0.0, 1.0, 0.0, 0.0),
                   length=1.0, samples=201):
    """Cartesian geodesic samples with the columns of the ``geodesic`` command."""
    trace = cartesian_geodesic(as_quat(start), as_quat(direction), float(length), model, int(samples))
    return TRACE_COLUMNS, trace.rows()


def injectivity_scan(rho_min=0.1, rho_max=3.0, points=30, max_length=100.0):
    """Arc length for a geodesic of ``D`` leaving ``rho0`` along the parallel to reach the opposite generator.

    Finite values at every ``rho0`` are the numerical evidence for a finite
    injectivity radius; no radius value is claimed.
    """
    rows = [[r, surface_return_length(r, max_length)]
            for r in np.linspace(float(rho_min), float(rho_max), int(points))]
    return ("rho0", "return_length"), rows


SELECTORS = {
    "curvature-profile": curvature_profile,
    "metric-coefficients": metric_coefficient_table,
    "geodesic-trace": geodesic_trace,
    "injectivity-scan": injectivity_scan,
}


def emit_plot_data(what: str, params: dict | None = None) -> str:
    """CSV table for the selector ``what``; ``params`` are keyword arguments of its emitter."""
    if what not in SELECTORS:
        raise UnknownSelector(what)
    header, rows = SELECTORS[what](**(params or {}))
    return to_csv(header, rows)
