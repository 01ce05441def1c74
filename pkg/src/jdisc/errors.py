"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters or a violated precondition."""


class UsageError(ValueError):
    """Operands that cannot be combined (e.g. fields on different grids)."""


class InfeasibleExponentError(ConfigurationError):
    """No candidate exponent makes the inner map a contraction.

    ``products`` maps each candidate ``p`` to ``a0 * safety * ||R0||_p``.
    """

    def __init__(self, message, products):
        super().__init__(message)
        self.products = dict(products)


class ConvergenceError(RuntimeError):
    """An iteration hit its cap before meeting its tolerance."""

    def __init__(self, message, history=None, last_ratio=None):
        super().__init__(message)
        self.history = history
        self.last_ratio = last_ratio


class DegenerateCurveError(ValueError):
    """A boundary trace passes (numerically) through the origin."""


class DegeneracyError(ValueError):
    """A matrix that must be invertible is singular at some sample."""


class ApproximationError(ValueError):
    """A polynomial fit did not reach the requested accuracy."""


class EllipticityError(ValueError):
    """The Beltrami coefficient reaches modulus one."""


class ConstructionError(ValueError):
    """A constructed object fails one of the properties it must satisfy."""


class DegenerateMorseError(ValueError):
    """A normalized quadratic coefficient sits on the excluded value 1."""
