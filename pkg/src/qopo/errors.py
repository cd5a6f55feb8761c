"""Exception and warning types raised across the package."""


class QOPOError(Exception):
    """Base class for all package errors."""


class ParameterError(QOPOError, ValueError):
    pass


class NonPositiveRate(ParameterError):
    pass


class TruncationTooSmall(ParameterError):
    pass


class NegativePump(ParameterError):
    pass


class DimensionMismatch(QOPOError, ValueError):
    pass


class IndexOutOfRange(QOPOError, IndexError):
    pass


class SolverError(QOPOError, RuntimeError):
    pass


class NoZeroEigenvalue(SolverError):
    pass


class DegenerateSteadyState(SolverError):
    pass


class UnstableStep(SolverError):
    pass


class RootFindingFailed(SolverError):
    pass


class UnphysicalCovariance(QOPOError, ValueError):
    pass


class ConfigParseError(QOPOError, ValueError):
    pass


class OutputUnwritable(QOPOError, OSError):
    pass


class TailMassExceeded(UserWarning):
    """Density matrix has non-negligible weight in the truncation edge band."""
