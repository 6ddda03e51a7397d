"""Exceptions raised by the complex-domain geometry, solvers and pipeline."""


class ComplexDomainError(Exception):
    """Base class for numerical-domain failures (CLI exit code 3)."""


class ShapeError(ComplexDomainError, ValueError):
    """Operand has the wrong shape (non-square, mismatched sizes)."""


class NotHermitianError(ComplexDomainError, ValueError):
    def __init__(self, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"matrix is not Hermitian: ||a - a^H||_F = {residual:.3e} > {tolerance:.3e}"
        )


class NotPositiveDefiniteError(ComplexDomainError, ValueError):
    def __init__(self, eigenvalue, floor):
        self.eigenvalue = eigenvalue
        self.floor = floor
        super().__init__(
            f"matrix is not positive definite: min eigenvalue {eigenvalue:.3e} <= {floor:.1e}"
        )


class SingularMatrixError(ComplexDomainError, ArithmeticError):
    def __init__(self, rcond, floor):
        self.rcond = rcond
        self.floor = floor
        super().__init__(
            f"matrix is singular or ill-conditioned: reciprocal condition {rcond:.3e} <= {floor:.1e}"
        )


class DomainMembershipError(ComplexDomainError, ValueError):
    """A value does not lie in the domain it was declared to belong to."""


class BoundaryError(ComplexDomainError, ArithmeticError):
    """A quantity blew up at the boundary of a bounded domain."""


class SpectrumError(ComplexDomainError, ArithmeticError):
    """Eigenvalues left the interval a formula is defined on."""


class FrechetError(ComplexDomainError, ArithmeticError):
    def __init__(self, message, last_iterate=None, iteration=None):
        self.last_iterate = last_iterate
        self.iteration = iteration
        super().__init__(message)


class DegenerateSeriesError(ComplexDomainError, ValueError):
    """Time series too short or too degenerate for the reflection recursion."""


class InvalidSpecError(ValueError):
    """A dataset or class recipe has invalid fields (CLI usage error)."""


class NaiveDistanceWarning(UserWarning):
    """The naive cross-ratio matrix lost its real non-negative spectrum."""
