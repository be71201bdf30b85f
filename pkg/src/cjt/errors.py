"""Structured exceptions shared across the package."""


class CjtError(Exception):
    """Base class for all solver and configuration errors."""


class ConfigError(CjtError):
    """Invalid parameters or run configuration.

    The message carries the offending field path, e.g. ``sweep.points``.
    """


class UnstableBathError(CjtError):
    """A boson bath with non-positive on-site or collective energies.

    The mean-field and fluctuation analysis require every collective mode
    energy to be positive; a violation means the chosen couplings do not
    describe a stable vibrational bath.
    """

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class ConvergenceError(CjtError):
    """An iterative solver ran out of iterations.

    ``diagnostics`` is a dict with the last residual and iteration counts,
    kept for error reports and debugging.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class UnstableExpansionPointError(CjtError):
    """The quadratic fluctuation form is not positive semidefinite.

    Raised when the expansion point is a saddle of the variational energy
    rather than a minimum, or when the symplectic eigenproblem produces
    complex frequencies beyond tolerance.
    """


class DimensionCapError(CjtError):
    """Requested Hilbert-space dimension exceeds the configured cap."""
