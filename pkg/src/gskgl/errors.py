"""Exception hierarchy shared by the numerical modules and the CLI."""


class GSKError(Exception):
    """Base class for all package errors."""


class GridMismatchError(GSKError, ValueError):
    """Two fields live on different grids."""


class DefectiveMatrixError(GSKError, ArithmeticError):
    """A 2x2 symbol has a (numerically) repeated eigenvalue with a single eigenvector."""


class NoTuringPointError(GSKError):
    """No sign change of the maximal growth rate was found in the searched range of a."""


class HomogeneousInstabilityError(GSKError):
    """The first instability occurs at wavenumber zero."""


class TuringHopfError(GSKError):
    """The critical eigenvalue is complex, which is out of scope."""


class ResonantSolveError(GSKError, ArithmeticError):
    """The linear solve for a quadratic correction is ill-conditioned."""


class UnresolvedEnvelopeError(GSKError, ValueError):
    """The slow envelope does not fit on the fast grid after the carrier shift."""


class BlowUpError(GSKError):
    """The state exceeded the configured sup-norm threshold.

    ``time`` is the time of failure when known (the integrators fill it in).
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class RetryExhaustedError(GSKError):
    """The amplitude-halving retry loop ran out of attempts."""


class ConfigError(GSKError, ValueError):
    """Invalid or unknown configuration entry."""


class ValidationFailure(GSKError):
    """A validation command measured a value outside its acceptance band."""


class DegenerateProjectionError(GSKError, ArithmeticError):
    """The carrier amplitude is too small to extract an envelope from it."""
