"""Exception hierarchy for the decomposition library.

Every exception carries the exit code that the command-line front end reports for it.
"""


class PirdError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# Usage errors
class UsageError(PirdError, ValueError):
    """Invalid arguments or inconsistent options."""

    exit_code = 2


class LatticeSizeError(UsageError):
    """Number of sources outside the supported lattice range."""


class IncompleteInputError(UsageError):
    """A value is missing for at least one lattice atom."""


class BandRangeError(UsageError):
    """Integration band outside [0, pi] or empty."""


class ParameterError(UsageError):
    """A numerical parameter is outside its admissible range."""


class InvalidSelectionError(UsageError):
    """Target/source channel selection is inconsistent."""


# Data errors
class DataError(PirdError):
    """Input data cannot be used for the analysis."""

    exit_code = 3


class DataFormatError(DataError):
    """Input file could not be parsed."""


class MissingColumnError(DataError):
    """A requested column is not present in the input file."""


class EmptyDataError(DataError):
    """Input contains no data rows."""


class NonFiniteDataError(DataError):
    """Input contains missing or non-finite values."""


class EstimationError(DataError):
    """The VAR regression problem is rank deficient or underdetermined."""


# Numerical degeneracy
class NumericalDegeneracyError(PirdError):
    """A numerical quantity is singular, unstable or inconsistent."""

    exit_code = 4


class StabilityError(NumericalDegeneracyError):
    """VAR model is not stable (companion spectral radius >= 1)."""


class NonstationarityError(NumericalDegeneracyError):
    """The VAR transfer function is singular at some frequency."""


class DegenerateSpectrumError(NumericalDegeneracyError):
    """A cross-spectral submatrix is singular."""


class DegenerateCovarianceError(NumericalDegeneracyError):
    """A covariance submatrix is singular."""


class ConsistencyError(NumericalDegeneracyError):
    """Decomposition atoms do not re-accumulate to the information rates they decompose."""
