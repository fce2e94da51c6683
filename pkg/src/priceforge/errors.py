"""Exception hierarchy shared by all priceforge modules."""


class PriceForgeError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class MalformedRow(PriceForgeError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class GapError(PriceForgeError):
    def __init__(self, missing, message=None):
        self.missing = list(missing)
        first = self.missing[0] if self.missing else "?"
        super().__init__(message or f"missing timestamp {first} ({len(self.missing)} interval(s))")


class MisalignedSeries(PriceForgeError):
    pass


class NoFullWeek(PriceForgeError):
    pass


class EmptyInput(PriceForgeError, ValueError):
    pass


class BadFraction(PriceForgeError, ValueError):
    pass


class DegenerateSample(PriceForgeError):
    pass


class TooShort(PriceForgeError, ValueError):
    pass


class NonpositiveBeta(PriceForgeError, ValueError):
    pass


class DegenerateAverage(PriceForgeError):
    pass


class ZeroDeviation(PriceForgeError):
    pass


class UnreachableTarget(PriceForgeError):
    pass


class BadK(PriceForgeError, ValueError):
    pass


class BadKMax(PriceForgeError, ValueError):
    pass


class DimensionMismatch(PriceForgeError, ValueError):
    pass


class NumericalFailure(PriceForgeError):
    pass


class InfeasibleSchedule(PriceForgeError):
    pass


class MissingIdPrices(PriceForgeError):
    pass


class BadWeights(PriceForgeError, ValueError):
    pass


class BadSpec(PriceForgeError, ValueError):
    pass
