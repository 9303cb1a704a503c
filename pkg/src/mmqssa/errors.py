"""Exception hierarchy shared by all modules."""


class MMQSSAError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(MMQSSAError, ValueError):
    """A rate constant, concentration or volume is outside its admissible range."""


class DomainError(MMQSSAError):
    """The inputs are valid, but the requested quantity does not exist for them."""


class NoStationaryPointError(DomainError):
    """alpha >= 1: influx exceeds the limiting rate, so substrate grows without bound."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(
            f"no stationary point: alpha = k0/v = {alpha:.6g} >= 1 "
            "(substrate accumulates without bound)"
        )


class DivergenceError(DomainError):
    """An integrator produced a non-finite state."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"non-finite state encountered at t = {time!r}")


class ManifoldDomainError(DomainError):
    """A point handed to the projector does not lie on the critical manifold."""


class HyperbolicityError(DomainError):
    """DfP is singular at the requested point, so the projector is undefined."""


class LyapunovError(DomainError):
    """The stationary Lyapunov equation has no unique solution (Jacobian not Hurwitz)."""


class InsufficientBudgetError(DomainError):
    """The event budget is exhausted before burn-in completes."""


class AbsorbingStateWarning(UserWarning):
    """All propensities vanished before the requested end time."""
