"""Exception hierarchy shared by every module."""


class QHGeoError(Exception):
    """Base class for all library errors."""


class DomainViolation(QHGeoError, ValueError):
    """A point lies outside the open domain an operation is defined on."""


class DegreeOverflow(QHGeoError, ValueError):
    """A series operation would exceed the configured degree cap."""


class NonInvertible(QHGeoError, ZeroDivisionError):
    """Star inverse requested for a series with vanishing constant term."""


class SingularAt(QHGeoError, ZeroDivisionError):
    """The point lies on the zero set of the symmetrization f^s."""

    def __init__(self, q, value):
        super().__init__(f"|f^s(q)| = {value:.3e} below threshold at q = {[float(x) for x in q]}")
        self.q = q
        self.value = value


class ZeroAtPoint(QHGeoError, ZeroDivisionError):
    """f(q) = 0, so the conjugated form of f*g(q) is undefined (f*g(q) itself is 0)."""

    def __init__(self, q, lhs):
        super().__init__(f"f vanishes at q = {[float(x) for x in q]}")
        self.q = q
        self.lhs = lhs


class NegativeCoefficient(QHGeoError, ArithmeticError):
    pass


class QuadratureNotConverged(QHGeoError, ArithmeticError):
    def __init__(self, message, value=None, refinement_error=None):
        super().__init__(message)
        self.value = value
        self.refinement_error = refinement_error


class StepTooLarge(QHGeoError, ArithmeticError):
    pass


class SingularChart(QHGeoError, ArithmeticError):
    pass


class NoConvergence(QHGeoError, ArithmeticError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class UnknownSuite(QHGeoError, KeyError):
    pass


class UnknownSelector(QHGeoError, KeyError):
    pass
