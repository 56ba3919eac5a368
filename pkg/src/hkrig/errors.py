"""Exception hierarchy shared by every hkrig module."""


class KrigingError(Exception):
    """Base class for all hkrig errors."""


class ShapeError(KrigingError, ValueError):
    """Array dimensions are inconsistent."""


class InvalidInputError(KrigingError, ValueError):
    """Non-finite or otherwise unusable input values."""


class InvalidHyperparameterError(KrigingError, ValueError):
    """Correlation lengths must be finite and strictly positive."""


class NotPositiveDefiniteError(KrigingError, ArithmeticError):
    """Correlation matrix could not be factorized even at maximum jitter."""

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class UnderdeterminedTrendError(KrigingError, ValueError):
    """Trend basis has fewer samples than functions or is rank deficient."""


class InsufficientDataError(KrigingError, ValueError):
    pass


class FitError(KrigingError):
    """Hyperparameter estimation produced no usable model."""


class AllInfeasibleError(FitError):
    """Every point probed by the optimizer returned the failure sentinel."""


class DegenerateValidationError(KrigingError, ValueError):
    """Validation responses have zero spread, so Q2 / MAE are undefined."""


class NoModelError(KrigingError):
    """Model selection was asked to pick from a sweep with no successful rows."""


class DataError(KrigingError, ValueError):
    """Base class for dataset ingestion problems."""


class SchemaError(DataError):
    pass


class ParseError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class ConstantInputError(DataError):
    pass
