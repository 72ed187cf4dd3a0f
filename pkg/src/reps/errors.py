"""Exception classes raised across the package."""


class RepsError(Exception):
    """Base class for all errors raised by this package."""


class IoError(RepsError, OSError):
    """A file could not be read or written."""


class DataError(RepsError, ValueError):
    """Input data violates a documented precondition."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class DegenerateData(DataError):
    pass


class AsymmetryError(DataError):
    pass


class NegativeDistance(DataError):
    pass


class NonzeroDiagonal(DataError):
    pass


class InvalidFoldCount(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptySeries(DataError):
    pass


class MatchInfeasible(DataError):
    pass


class MetricMismatch(DataError):
    pass


class SingleClass(DataError):
    pass


class EmptyInput(DataError):
    pass


class InvalidK(DataError):
    pass


class EmptyPrototypeSet(DataError):
    pass


class UndefinedLOR(DataError):
    pass


class DatasetMismatch(DataError):
    pass


class NotConverged(RepsError):
    """Raised only on request; solvers normally flag non-convergence instead."""
