"""Exception types raised across the package."""


class NonHermitianError(ValueError):
    pass


class OrthogonalPostselectionError(ValueError):
    """Postselection state has (numerically) zero overlap with the prepared state."""


class InsensitivePostselectionError(ValueError):
    """The weak value carries no first-order information about beta.

    Happens when the postselection state is an S_z eigenstate, or more
    generally when the inversion denominator vanishes.
    """


class TruncationError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


class InsufficientPrecisionError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass
