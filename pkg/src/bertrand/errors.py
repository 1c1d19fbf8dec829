"""Exception hierarchy shared by all modules."""


class BertrandError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(BertrandError, ValueError):
    pass


class DomainError(BertrandError, ValueError):
    """Radius outside the open radial interval where the metric is defined."""


class EmptyDomain(BertrandError, ValueError):
    pass


class OriginError(BertrandError, ValueError):
    pass


class QuadratureFailure(BertrandError, ArithmeticError):
    pass


class SingularInner(BertrandError, ArithmeticError):
    pass


class UnknownExample(BertrandError, KeyError):
    pass


class StepFailure(BertrandError, RuntimeError):
    pass


class DegenerateOrbit(BertrandError, ArithmeticError):
    """The orbit constants admit no orbit (or a circular one, where chi is 0/0)."""


class NoSolution(BertrandError, ValueError):
    pass


class RadialOrbit(BertrandError, ValueError):
    pass


class InsufficientData(BertrandError, ValueError):
    pass


class InsufficientTurningPoints(BertrandError, ValueError):
    pass


class InconsistentBranch(BertrandError, ValueError):
    pass


class InsufficientCoverage(BertrandError, ValueError):
    pass


class ConfigError(BertrandError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
