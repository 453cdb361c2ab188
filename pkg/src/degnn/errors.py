"""Exception taxonomy shared across the package.

Data errors (bad files, bad shapes, bad labels) are distinct from runtime
errors so the CLI can map them to different exit codes.
"""


class DegnnError(Exception):
    """Base class for all package-specific errors."""


class DataError(DegnnError):
    """Problems with input data or files (CLI exit code 2)."""


class MissingFile(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class BadLabel(DataError):
    pass


class IoError(DataError):
    pass


class UnrecognizedFormat(DataError):
    pass


class InsufficientNodes(DataError):
    pass


class NoReports(DataError):
    pass


class RuntimeFailure(DegnnError):
    """Numeric / algorithmic failures (CLI exit code 3)."""


class DimensionMismatch(RuntimeFailure):
    pass


class LengthMismatch(RuntimeFailure):
    pass


class NonPositiveDegree(RuntimeFailure):
    pass


class NotEnoughNonEdges(RuntimeFailure):
    pass


class ZeroNormRow(RuntimeFailure):
    pass


class NonScalarLoss(RuntimeFailure):
    pass


class EmptyGraph(RuntimeFailure):
    pass


class TooFewRuns(RuntimeFailure):
    pass
