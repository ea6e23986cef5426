"""Exception types raised by corrgen."""


class CorrgenError(Exception):
    """Base class for all corrgen errors."""


class InputError(CorrgenError, ValueError):
    """Malformed or insufficient user input."""


class DegenerateSegmentError(InputError):
    """Two consecutive waypoints coincide."""


class DomainError(CorrgenError, ValueError):
    """A path parameter lies outside the valid range."""


class DegeneracyError(CorrgenError, ArithmeticError):
    """An ellipse matrix is not positive definite where it must be."""


class UnboundedProblemError(CorrgenError):
    """The program has nothing bounding the corridor (no points, wrapper or eigen bounds)."""


class SolverError(CorrgenError):
    """The convex solver did not return an optimal solution."""

    def __init__(self, message, status="numerical-failure", residuals=None):
        super().__init__(message)
        self.status = status
        self.residuals = residuals or {}


class ParseError(InputError):
    """A file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(InputError):
    """Parsed data violates a value constraint (e.g. non-finite coordinates)."""
