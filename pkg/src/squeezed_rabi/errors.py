"""Exception and warning types shared across the package."""


class NumericalError(RuntimeError):
    """A computation could not produce a trustworthy number."""


class TruncationError(NumericalError):
    """The Fock cutoff is too small for the requested state."""


class ConvergenceError(NumericalError):
    """An iterative solve or truncation ladder failed to converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegenerateDenominator(NumericalError):
    """A closed-form expression hit a vanishing denominator."""


class IncompleteBasis(NumericalError):
    """Retained dressed states do not span the initial state."""


class TruncationWarning(UserWarning):
    pass


class CrossCheckWarning(UserWarning):
    pass
