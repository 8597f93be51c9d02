"""Exception hierarchy for weightlab."""


class WeightLabError(Exception):
    """Base class for all errors raised by weightlab."""


class InvalidInterval(WeightLabError, ValueError):
    pass


class NonIntegrable(WeightLabError, ArithmeticError):
    """A piece c|x|^a with a <= -1 reaches the origin inside the integration range."""


class UndefinedPower(WeightLabError, ValueError):
    pass


class DegenerateWeight(WeightLabError, ValueError):
    """The weight has zero mass on a window where a ratio is required."""


class ZeroWeightAtPoint(WeightLabError, ValueError):
    pass


class DegenerateExponent(WeightLabError, ValueError):
    pass


class ExponentOrder(WeightLabError, ValueError):
    pass


class Divergent(WeightLabError, ArithmeticError):
    """An s-integral or supremum diverges; ``end`` names the offending end."""

    def __init__(self, message, end=None):
        super().__init__(message)
        self.end = end


class InsufficientPoints(WeightLabError, ValueError):
    pass


class NonPositiveValue(WeightLabError, ValueError):
    pass


class BracketTooWide(WeightLabError, RuntimeError):
    pass
