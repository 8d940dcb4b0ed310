"""Exception types raised by the package."""


class ParameterError(ValueError):
    """Invalid parameter value (distribution parameters, thresholds, fold counts)."""


class ShapeError(ValueError):
    """Array dimensions do not agree."""


class DomainError(ValueError):
    """Argument lies outside the domain of a function."""


class CovarianceError(ValueError):
    """Covariance matrix is not symmetric positive semi-definite."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge or was not bracketed."""


class DependenceError(ArithmeticError):
    """A vector is numerically dependent on the ones preceding it."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vector {index} is numerically dependent on its predecessors")


class ConditioningError(ArithmeticError):
    """Least-squares design matrix is rank deficient."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"design matrix is rank deficient at column {column}")
