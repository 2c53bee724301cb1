"""Exception hierarchy shared by the package."""


class SecrecyError(Exception):
    """Base class for every domain error raised by this package."""


class SchemaError(SecrecyError):
    """A channel document is malformed (missing fields, wrong shapes)."""


class ValidationError(SecrecyError):
    """A probability table violates a normalisation or sign constraint."""


class DimensionMismatch(SecrecyError):
    """Alphabet cardinalities of two objects do not line up."""


class UnknownVariable(SecrecyError, KeyError):
    """A variable name is not part of a Pmf."""

    def __str__(self):
        return Exception.__str__(self)


class OverlappingSets(SecrecyError, ValueError):
    """Variable sets that must be disjoint share a member."""


class NotCommonOutput(SecrecyError):
    """The operation requires Y1 = Y2 = Z but the channel does not have it."""


class MarkovViolation(SecrecyError):
    """An auxiliary distribution does not satisfy the required Markov chain."""


class EmptyRegion(SecrecyError):
    """Every policy of a sweep was infeasible."""


class CapExceeded(SecrecyError):
    """An exact enumeration would exceed the configured size cap."""


class CapacityOverflow(CapExceeded):
    """Codebook bin counts exceed the enumeration cap."""


class NondeterministicChannel(SecrecyError):
    """Exact leakage enumeration needs a deterministic channel."""


class PreconditionUnmet(SecrecyError):
    """Rate triple violates the hypotheses of the equivocation lemma."""


class IndexOutOfRange(SecrecyError, IndexError):
    """A message, key or codeword index is outside its range."""
