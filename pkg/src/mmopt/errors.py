"""Exception hierarchy shared by all mmopt modules."""


class MMOptError(Exception):
    """Base class for all mmopt errors."""


class DimensionMismatch(MMOptError):
    pass


class CornerOrderViolation(MMOptError):
    pass


class NonFiniteEntry(MMOptError):
    pass


class EmptyList(MMOptError):
    pass


class NegativeWeight(MMOptError):
    pass


class DomainError(MMOptError):
    """A scalar map was evaluated outside its domain (e.g. log of a negative)."""


class DirectionViolation(MMOptError):
    """A scalar map declared monotone failed the sampled direction check."""


class NegativityDetected(MMOptError):
    """A factor of a product declared nonnegative evaluated below -1e-12."""


class NonpositiveDenominator(MMOptError):
    pass


class EvaluationError(MMOptError):
    """A function evaluation produced NaN or otherwise failed."""


class ZeroDiameterBox(MMOptError):
    pass


class MissingMonotoneSplit(MMOptError):
    pass


class InvalidNetwork(MMOptError):
    pass


class InnerSolveFailed(MMOptError):
    pass


class SpecError(MMOptError):
    """A benchmark specification fails its preconditions."""


class ParseError(MMOptError):
    """An instance file is malformed; the message names the offending field."""


class SchemaVersionError(ParseError):
    pass
