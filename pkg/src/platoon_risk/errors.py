"""Exception hierarchy shared by every module of the package."""


class PlatoonError(Exception):
    """Base class for all errors raised by :mod:`platoon_risk`."""


class InvalidParameterError(PlatoonError, ValueError):
    """A parameter is outside its admissible range."""


class NotConnectedError(PlatoonError, ValueError):
    """The communication graph is disconnected."""


class OutOfDomainError(PlatoonError, ValueError):
    """Argument lies outside the domain of a function."""


class UnstableParametersError(PlatoonError, ValueError):
    """The delayed platoon does not converge for the given parameters."""


class InsufficientSamplesError(PlatoonError, ValueError):
    """Too few Monte Carlo samples for the requested estimator."""


class InsufficientConditioningMassError(InsufficientSamplesError):
    """Too few samples fall inside the conditioning event."""

    def __init__(self, message, acceptance_fraction=float("nan")):
        super().__init__(message)
        self.acceptance_fraction = acceptance_fraction
