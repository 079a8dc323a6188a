"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, ``DataError``
subclasses exit 2 and ``NumericError`` subclasses exit 3.
"""


class EcosweepError(Exception):
    """Base class for all toolkit errors."""


class DataError(EcosweepError):
    """Invalid inputs: bad files, bad schemas, violated preconditions."""


class InvalidSpaceError(DataError):
    """Parameter space definition violates its invariants."""


class InvalidClipError(DataError):
    """A requested range clip is not a sub-interval of the original range."""


class EmptyDesignError(DataError):
    """A design or batch with zero rows was supplied."""


class SchemaError(DataError):
    """A CSV/JSON artifact does not conform to its documented schema."""


class NumericError(EcosweepError):
    """Numeric failures: divergence, degeneracy, non-finite values."""


class DegenerateDesignError(NumericError):
    """Design matrix is rank deficient or a factor has no variation."""


class NonFiniteError(NumericError):
    """A computation produced NaN or infinity."""
