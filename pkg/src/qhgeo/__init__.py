"""Invariant Riemannian geometry of the quaternionic Hardy space.

Slice-regular power series and their star algebra, Hardy kernels on the unit
ball and the right half-space, the kernel-induced metric with its isometries,
geodesics, distance bounds and boundary-integral norm identities.
"""

from ._backend import BACKEND
from .errors import (DegreeOverflow, DomainViolation, NegativeCoefficient, NoConvergence,
                     NonInvertible, QHGeoError, QuadratureNotConverged, SingularAt, SingularChart,
                     StepTooLarge, UnknownSelector, UnknownSuite, ZeroAtPoint)
from .geodesics import (DistanceBounds, GeodesicTrace, SurfaceState, bilateral_quantity,
                        cartesian_geodesic, distance_bounds, killing_momentum, polyline_relax,
                        shoot_distance, surface_curvature, surface_geodesic)
from .hardy import (delta, donatini_rescaling_check, halfspace_boundary_integral, hardy_norm2,
                    inner_product, kernel_norms, rkhs_metric_coefficients, sphere_boundary_integral,
                    sphere_limit_norm)
from .metric import (IsometryMap, Polyline, apply_isometry, curve_length, metric_ball,
                     metric_coefficients, metric_halfspace, metric_norm, pullback_ratio,
                     slice_distance)
from .plotdata import emit_plot_data
from .quat import SlicePoint, polar, quat, slice_decompose, tangent_split
from .series import (MoebiusMap, RegularSeries, T_f, cayley, cayley_inv, kernel_ball,
                     kernel_halfspace, regular_quotient, star_inverse, star_mul)
from .suites import RunConfig, SuiteReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DegreeOverflow", "DomainViolation", "NegativeCoefficient", "NoConvergence",
    "NonInvertible", "QHGeoError", "QuadratureNotConverged", "SingularAt", "SingularChart",
    "StepTooLarge", "UnknownSelector", "UnknownSuite", "ZeroAtPoint", "DistanceBounds",
    "GeodesicTrace", "SurfaceState", "bilateral_quantity", "cartesian_geodesic", "distance_bounds",
    "killing_momentum", "polyline_relax", "shoot_distance", "surface_curvature",
    "surface_geodesic", "delta", "donatini_rescaling_check", "halfspace_boundary_integral",
    "hardy_norm2", "inner_product", "kernel_norms", "rkhs_metric_coefficients",
    "sphere_boundary_integral", "sphere_limit_norm", "IsometryMap", "Polyline", "apply_isometry",
    "curve_length", "metric_ball", "metric_coefficients", "metric_halfspace", "metric_norm",
    "pullback_ratio", "slice_distance", "emit_plot_data", "SlicePoint", "polar", "quat",
    "slice_decompose", "tangent_split", "MoebiusMap", "RegularSeries", "T_f", "cayley",
    "cayley_inv", "kernel_ball", "kernel_halfspace", "regular_quotient", "star_inverse",
    "star_mul", "RunConfig", "SuiteReport", "run_suite",
]
