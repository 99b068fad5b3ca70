"""Exception types shared across the package.

Everything derives from StillwaveError so callers can catch the package's
failures with a single except clause. Mixins with ValueError / RuntimeError
keep the types idiomatic for code that does not know about this package.
"""


class StillwaveError(Exception):
    """Base class for all errors raised by stillwave."""


class InvalidFamilyParams(StillwaveError, ValueError):
    """Vorticity family parameters violate the family's constraints."""


class StepFailure(StillwaveError, RuntimeError):
    """The adaptive integrator failed to meet its tolerance."""


class NotStill(StillwaveError):
    """The antiderivative maximiser sits below tau = 1, so the monotone
    rise cannot end with zero surface speed."""


class DivergentDepth(StillwaveError):
    """The depth integral diverges (the vorticity vanishes at the
    maximiser of its antiderivative)."""


class NoStillSolution(StillwaveError):
    """No stream solution with a still free surface exists for this
    vorticity distribution."""


class NonIntegrable(StillwaveError):
    """The integrand grows too fast at an endpoint for the declared
    algebraic exponent; the integral does not converge."""


class OutOfDomain(StillwaveError, ValueError):
    """Argument outside the domain of a special function."""


class NewtonDiverged(StillwaveError, RuntimeError):
    """The damped Newton iteration failed to reduce the residual."""


class SurfaceCollapse(StillwaveError, RuntimeError):
    """A Newton step drove the free surface to zero or negative depth
    and damping could not recover."""


class DepthMismatch(StillwaveError, ValueError):
    """Wave state and reference flow depths are too far apart to
    define perturbation fields."""


class InvalidSweepCase(StillwaveError, ValueError):
    """A requested sweep perturbation violates the slope or amplitude
    caps declared for the sweep."""


class ConfigError(StillwaveError, ValueError):
    """A CLI configuration file is malformed or incomplete."""
