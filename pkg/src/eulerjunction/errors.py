"""Exception hierarchy shared by all modules."""


class EulerJunctionError(Exception):
    """Base class for every error raised by the package."""


class DomainError(EulerJunctionError, ValueError):
    """A state or parameter lies outside the model's domain of validity.

    ``quantity`` and ``value`` name the offending quantity.
    """

    def __init__(self, quantity, value, message=None):
        self.quantity = quantity
        self.value = value
        if message is None:
            message = f"{quantity} = {value!r} is outside the admissible domain"
        super().__init__(message)


class NotApplicable(DomainError):
    """The requested wave strength leaves the domain of the selected curve branch."""


class VacuumError(DomainError):
    """Density or internal energy collapsed below the vacuum floor."""


class NoConvergence(EulerJunctionError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class SonicError(DomainError):
    """A characteristic speed came too close to zero (sonic point)."""


class IntegrationError(SonicError):
    """The stationary ODE left the subsonic region."""


class NonSubsonicResult(DomainError):
    """A transmitted state fell outside the subsonic region."""


class NonSubsonicTrace(NonSubsonicResult):
    """A junction trace left the subsonic region."""


class SpeedSignError(EulerJunctionError, RuntimeError):
    """A wave in a junction fan travels on the wrong side of the junction."""


class SectionRatioError(DomainError):
    """Relative section jump exceeds the perturbative guard."""


class UnsupportedGamma(EulerJunctionError, ValueError):
    """Closed-form expansions are only available for gamma = 5/3."""


class AmplitudeOverflow(EulerJunctionError, RuntimeError):
    """A propagated wave grew beyond the perturbative guard.

    ``trajectory`` holds the strengths computed before the overflow.
    """

    def __init__(self, message, trajectory=None, ratios=None):
        self.trajectory = [] if trajectory is None else [float(x) for x in trajectory]
        self.ratios = [] if ratios is None else [float(x) for x in ratios]
        super().__init__(message)
