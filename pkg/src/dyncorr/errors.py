"""Exception hierarchy shared across the package."""


class DyncorrError(Exception):
    """Base class for all errors raised by this package."""


class ProfileOutOfRange(DyncorrError):
    """A correlation value lies outside [-1, 1]."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"rho_{index} = {value!r} lies outside [-1, 1]")


class IncrementInfeasible(DyncorrError):
    """An implied per-step increment correlation lies outside [-1, 1]."""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(
            f"increment correlation r_{index} = {value!r} lies outside [-1, 1]; "
            "the profile has no generative meaning under increment coupling"
        )


class IndexOutOfRange(DyncorrError):
    """Evaluation time index outside the grid 1..T."""


class DegenerateVariance(DyncorrError):
    """A variance estimate is zero, so the correlation ratio is undefined."""


class NegativeVarianceEstimate(DyncorrError):
    """A variance estimate came out negative (possible for the second GBM variant)."""


class NumericRange(DyncorrError):
    """An intermediate exponent falls outside the safe double-precision range."""


class PathOverflow(DyncorrError):
    """exp(sigma * W_t) would overflow; lower sigma or T."""


class DomainError(DyncorrError):
    """Argument outside the mathematical domain of the function."""
