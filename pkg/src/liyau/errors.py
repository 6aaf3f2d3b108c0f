"""Exception hierarchy shared by all modules."""


class LiYauError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LiYauError, ValueError):
    """An argument lies outside the domain of the function being evaluated."""


class ConstructionError(LiYauError, ValueError):
    """An estimate or profile cannot be built with the given parameters."""


class ConfigError(LiYauError, ValueError):
    """Inputs that are individually valid but do not fit together."""


class InputError(LiYauError, ValueError):
    """Invalid user-supplied data (e.g. nonpositive initial values)."""


class AccuracyError(LiYauError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message, best_estimate):
        super().__init__(message)
        self.best_estimate = best_estimate


class BlowUpError(LiYauError, ArithmeticError):
    """ODE right-hand side became non-finite."""

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class SingularityError(LiYauError, ArithmeticError):
    """alpha(t) reached 1, where the envelope ODE is singular."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class SpliceError(LiYauError, ValueError):
    """The two pieces of a spliced pair do not join continuously."""

    def __init__(self, message, jump):
        super().__init__(message)
        self.jump = jump


class ProfileError(ConstructionError):
    """A profile a(t) fails one of the admission checks (A1)/(A2)."""

    def __init__(self, message, assumption):
        super().__init__(message)
        self.assumption = assumption
