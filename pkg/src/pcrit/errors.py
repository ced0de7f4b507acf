"""Exception types shared across the package.

Plain argument mistakes raise ValueError directly; the classes here mark
failure modes that callers may want to catch separately.  Solver
non-convergence is never an exception: solvers return a report with a
``converged`` flag instead.
"""


class PcritError(Exception):
    """Base class for package specific errors."""


class DomainError(PcritError, ValueError):
    """An interval, point, or compact set lies outside the problem domain."""


class PreconditionError(PcritError, ValueError):
    """A documented precondition of an operation does not hold."""


class StateError(PcritError, RuntimeError):
    """Operation invoked in a state it does not support."""


class EvaluationError(PcritError, RuntimeError):
    """A potential or field evaluated to a non-finite value."""
