"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`MdShapleyError`, so
callers can catch one type at the boundary.  The CLI maps subfamilies to
exit codes: input/data problems to 2, numeric failures to 3.
"""


class MdShapleyError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MdShapleyError):
    """Vector/matrix dimensions are inconsistent with each other."""


class NonFinite(MdShapleyError):
    """An input contains NaN or infinite entries."""


class NotPositiveDefinite(MdShapleyError):
    """A covariance matrix fails the positive-definiteness pivot test."""


class IndexOutOfRange(MdShapleyError):
    """A coordinate index lies outside {0, ..., p-1}."""


class IndexOverlap(MdShapleyError):
    """Index arguments that must be disjoint are not."""


class DimensionTooLarge(MdShapleyError):
    """A brute-force enumeration was requested beyond its size guard."""


class InvalidLevel(MdShapleyError):
    """A probability level lies outside the open interval (0, 1)."""


class NegativeLambda(MdShapleyError):
    """A non-centrality parameter is negative."""


class EmptySubset(MdShapleyError):
    """An operation requiring a nonempty index set received an empty one."""


class SingularSubproblem(MdShapleyError):
    """A precision submatrix could not be solved."""


class DegenerateColumn(MdShapleyError):
    """A data column has (near-)zero scale and cannot be standardized."""


class InsufficientRows(MdShapleyError):
    """Too few observations for the requested estimate."""


class ParseError(MdShapleyError):
    """A model or data file could not be parsed."""


class ShapeMismatch(MdShapleyError):
    """Two arrays that must share a shape do not."""


class MissingResults(MdShapleyError):
    """A report was requested from a result file that does not exist."""


class SchemaVersionMismatch(MdShapleyError):
    """A result file is not a recognized report or has the wrong version."""
