"""Exception hierarchy shared by all modules."""


class WSingularError(Exception):
    """Base class for library errors."""


class KernelDomainError(WSingularError, ValueError):
    """A kernel was evaluated at (numerically) coincident points."""


class ArgumentError(WSingularError, ValueError):
    """An argument lies outside the documented domain."""


class ConvergenceError(WSingularError, RuntimeError):
    """An iterative procedure did not reach its tolerance.

    ``estimate`` holds the best value found before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class MeshError(WSingularError, ValueError):
    """Degenerate or inconsistent mesh geometry."""

    def __init__(self, message, triangle=None):
        super().__init__(message)
        self.triangle = triangle


class MeshParseError(WSingularError, ValueError):
    """Malformed mesh file; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergenceError(WSingularError, RuntimeError):
    """The capacitance iteration produced a non-positive denominator.

    ``run`` carries the partial :class:`~wsingular.capacitance.CapacitanceRun`.
    """

    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run
