"""Exception hierarchy shared by all modules.

Every error raised on purpose by the library derives from ``NBarrierError``;
the CLI maps the subclasses onto exit codes.
"""


class NBarrierError(Exception):
    """Base class for library errors."""


class ValidationError(NBarrierError, ValueError):
    """Invalid parameters (nonpositive rates, malformed input, bad options)."""


class DimensionError(ValidationError):
    """Vector or matrix length does not match the species count."""


class DegenerateBoxError(ValidationError):
    """Hypothesis box with u_lower[i] >= u_upper[i] for some species."""


class UnsupportedGridError(ValidationError):
    """Profile grid is not uniform or has too few points."""


class DomainError(NBarrierError, ValueError):
    """Argument outside the domain where a closed form is defined."""


class TangencyDegeneracyError(DomainError):
    """Zero discriminant where a slope of the conic branch is requested."""


class InconsistencyError(NBarrierError, RuntimeError):
    """A construction that should always succeed found no admissible answer.

    ``candidates`` carries whatever diagnostic values were tried.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class ConvergenceError(NBarrierError, RuntimeError):
    """Newton iteration failed; ``profile`` holds the last iterate."""

    def __init__(self, message, profile=None, iterations=0, norm=float("nan")):
        super().__init__(message)
        self.profile = profile
        self.iterations = iterations
        self.norm = norm


class LinearSolveError(ConvergenceError):
    """The banded Newton system could not be solved (singular Jacobian)."""
