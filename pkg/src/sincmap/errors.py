"""Exception hierarchy shared by all modules."""


class SincMapError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SincMapError, ValueError):
    """A point lies outside the domain of a map or on a branch cut."""


class OptimizationError(SincMapError):
    """The map parameter program failed to converge.

    Attributes:
        tau: homotopy parameter at which the failure occurred, or None.
    """

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class MonotonicityError(OptimizationError):
    """A solved map is not strictly increasing on the real axis."""


class DegenerateStepError(SincMapError, ValueError):
    """The step-size formula has a logarithm argument at or below one."""


class EvaluationError(SincMapError):
    """A quadrature node produced a non-finite integrand value.

    Attributes:
        index: signed node index k in -n..n.
        t: strip coordinate of the node.
        x: problem-space coordinate of the node.
    """

    def __init__(self, message, index=None, t=None, x=None):
        super().__init__(message)
        self.index = index
        self.t = t
        self.x = x


class IllConditionedError(SincMapError):
    """A linear system is numerically rank deficient.

    Attributes:
        condition: estimated 2-norm condition number.
    """

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class NonConvergenceError(SincMapError):
    """Newton iteration diverged or hit its iteration cap.

    Attributes:
        last_iterate: the final iterate, for inspection.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class ConfigurationError(SincMapError, ValueError):
    """A problem description is missing a required field."""
