"""Exception types raised by the library."""


class RmtError(Exception):
    """Base class for library errors."""


class InvalidDimension(RmtError, ValueError):
    pass


class InvalidParameter(RmtError, ValueError):
    pass


class NonFiniteInput(RmtError, ValueError):
    pass


class ConvergenceFailure(RmtError, RuntimeError):
    """A numerical routine failed to converge or lost its bracket."""


class AtomCollision(RmtError, ValueError):
    """An evaluation point coincides with an atom of a discrete measure."""


class RankDeficient(RmtError, ValueError):
    pass


class CompressibleVector(RmtError, ValueError):
    """Raised for compressible input; carries the certifying sparse approximant."""

    def __init__(self, message, approximant):
        super().__init__(message)
        self.approximant = approximant


class DensityNegativity(RmtError, RuntimeError):
    pass
