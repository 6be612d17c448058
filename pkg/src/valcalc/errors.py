"""Exception hierarchy shared by all modules."""


class ValcalcError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ValcalcError, ValueError):
    """An argument lies outside the domain of a (partial) operation."""


class NumericalError(ValcalcError, ArithmeticError):
    """A floating-point operation produced NaN or another invalid state."""


class ShapeError(ValcalcError, ValueError):
    """Operands have incompatible sizes, argument counts or degree caps."""


class SingularMatrixError(ValcalcError, ArithmeticError):
    """A pivot in an interval linear solve contains zero."""


class SolverError(ValcalcError):
    """Base class for algebraic-equation solver failures."""


class NoSolutionError(SolverError):
    """The search region provably contains no solution."""


class NoConvergenceError(SolverError):
    """The iteration did not reach the requested tolerance."""


class PartialResultError(SolverError):
    """Exhaustive search stopped with unresolved boxes.

    Both the verified solutions and the unresolved boxes are attached.
    """

    def __init__(self, message, solutions, unresolved):
        super().__init__(message)
        self.solutions = solutions
        self.unresolved = unresolved


class UnknownSolutionError(SolverError):
    """A functional Newton iteration failed to certify a solution."""


class IntegrationError(ValcalcError):
    """A flow step could not be computed."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index


class NoBoundError(IntegrationError):
    """No a-priori flow bound could be certified before the step underflowed."""


class ParseError(ValcalcError, ValueError):
    """Malformed expression or problem file."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        elif column is not None:
            where = f"column {column}: "
        super().__init__(where + message)
        self.line = line
        self.column = column
