"""Exception hierarchy shared by every module."""


class FracapError(Exception):
    """Base class for all package errors."""


# spectral core
class InvalidGrid(FracapError, ValueError):
    pass


class SampleError(FracapError, ValueError):
    pass


class InvalidOrder(FracapError, ValueError):
    pass


# fractional operator
class ToleranceUnreachable(FracapError):
    pass


class InvalidShift(FracapError, ValueError):
    pass


# nonlinear solver
class SolverError(FracapError):
    """A solve did not produce an accepted solution."""


class MaxIterExceeded(SolverError):
    """Newton ran out of iterations or stalled without reaching tolerance."""


class SingularJacobian(SolverError):
    pass


class PositivityViolated(SolverError):
    pass


class NoConvergence(SolverError):
    pass


class InvalidPair(FracapError, ValueError):
    pass


# continuation
class SeedFailed(SolverError):
    pass


class StepCollapse(SolverError):
    pass


class NoFoldInBranch(FracapError):
    pass


class NoBracket(FracapError):
    pass


class HomotopyStall(SolverError):
    pass


# certificates
class WindowGrowthExceeded(FracapError):
    pass


class DriftRequired(FracapError, ValueError):
    pass


class InvalidBeta(FracapError, ValueError):
    pass


class RootBracketFailed(FracapError):
    pass


class MissingCertificate(FracapError):
    pass


class PreconditionError(FracapError, ValueError):
    """Input data violate a documented precondition."""


# cli / io
class SchemaError(FracapError, ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
