"""Exception types shared across the package."""


class WigoscError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveParameter(WigoscError):
    """A physical parameter that must be positive (or non-negative) is not."""


class OverdampedUnsupported(WigoscError):
    """Damping rate is at or beyond critical; only the underdamped regime is modelled."""


class RequiresFriction(WigoscError):
    """Operation is only defined for strictly positive damping."""


class QuadratureNotConverged(WigoscError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, value: float, error_estimate: float, tol: float):
        super().__init__(f"{message} (value={value!r}, err={error_estimate:.3e}, tol={tol:.3e})")
        self.value = value
        self.error_estimate = error_estimate
        self.tol = tol


class StepTooLarge(WigoscError):
    """Requested SDE time step is too coarse for a trustworthy integration."""


class ParameterMismatch(WigoscError):
    """Two objects that must share physical parameters do not."""


class ConvergenceFailure(WigoscError):
    """An iterative linear-algebra routine did not converge."""


class SizeTooLarge(WigoscError):
    """Requested matrix size exceeds what this implementation supports."""
