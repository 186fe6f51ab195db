class RglabError(ValueError):
    """Base class for every error raised by rglab on bad input."""


class DomainError(RglabError):
    """A value lies outside the mathematical domain of an operation."""


class ShapeError(RglabError):
    pass


class DegenerateVarianceError(RglabError):
    """A vector that must vary is constant (zero sample variance)."""


class ParameterError(RglabError):
    pass


class ValidityError(RglabError):
    """A covariance or correlation structure is not a valid one (asymmetric, not PSD, ...)."""


class CorrelationClampWarning(RuntimeWarning):
    """A correlation of magnitude one was pulled inside (-1, 1)."""
