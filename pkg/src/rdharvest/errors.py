"""Exception types shared across the library."""


class RDHarvestError(Exception):
    """Base class for all library errors."""


class InvalidDomain(RDHarvestError):
    """Domain parameters or field/domain pairing violate an invariant."""


class NonFiniteValue(RDHarvestError):
    """A sampled or computed field contains NaN or infinity."""


class DimensionMismatch(RDHarvestError):
    """Operator and field sizes do not agree."""


class NotConverged(RDHarvestError):
    """An iterative solver failed to reach its tolerance.

    ``partial`` may carry whatever intermediate result was available
    when the iteration gave up (e.g. a partial continuation branch).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonPositiveEigenvector(RDHarvestError):
    """Principal eigenvector lost sign-definiteness (numerical failure)."""


class NoPositiveState(RDHarvestError):
    """No positive steady state exists in this regime (lambda1 >= 0)."""


class StepsExhausted(RDHarvestError):
    """Continuation ran out of steps before finishing the branch."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class StepFailed(RDHarvestError):
    """A time step could not be completed even after dt halving."""


class InvalidEps(RDHarvestError):
    """Threshold width violates the hypothesis eps0 < -lambda1/2."""


class ConfigError(RDHarvestError):
    """A run configuration is missing or has an invalid field."""
