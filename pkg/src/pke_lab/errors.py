"""Exception hierarchy shared across the package."""


class PkeLabError(Exception):
    pass


class DomainError(PkeLabError, ValueError):
    """Argument outside the real domain of a map (log of a negative, etc.)."""


class JetOrderError(PkeLabError, IndexError):
    pass


class SingularStateError(PkeLabError, ArithmeticError):
    """The solved-for highest derivative has a vanishing denominator."""

    def __init__(self, factor, value, message=None):
        self.factor = factor
        self.value = value
        super().__init__(message or f"singular state: {factor} = {value!r}")


class AbelSingularityError(SingularStateError):
    def __init__(self, value, message=None):
        super().__init__("Sigma", value, message or f"Abel singularity: Sigma = {value!r}")


class PoleError(PkeLabError, ZeroDivisionError):
    def __init__(self, name, value):
        self.name = name
        self.value = value
        super().__init__(f"pole: {name} = {value!r}")


class BranchError(PkeLabError, ValueError):
    def __init__(self, message, critical_points=()):
        self.critical_points = tuple(critical_points)
        super().__init__(message)


class ExtrapolationError(PkeLabError, ValueError):
    pass


class UndefinedPatternError(PkeLabError, ValueError):
    pass


class StencilError(PkeLabError, ValueError):
    pass


class SeedExhaustionError(PkeLabError, RuntimeError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class SchemaError(PkeLabError, ValueError):
    pass
