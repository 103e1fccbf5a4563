"""Exception hierarchy.

Every error raised by the library derives from :class:`CoopInfError`, which is
itself a ``ValueError`` so callers that only care about bad input can catch that.
:class:`InvariantViolation` is the exception: it signals a numerical or
internal failure rather than a bad argument.
"""


class CoopInfError(ValueError):
    pass


class ParseError(CoopInfError):
    pass


class NegativeEntry(CoopInfError):
    pass


class NonFiniteEntry(CoopInfError):
    pass


class ZeroRow(CoopInfError):
    pass


class ZeroColumn(CoopInfError):
    pass


class DimensionMismatch(CoopInfError):
    pass


class NotSquare(CoopInfError):
    pass


class NoPositiveDiagonal(CoopInfError):
    pass


class LimitExceeded(CoopInfError):
    def __init__(self, message, found):
        super().__init__(message)
        self.found = found


class NoTotalSupport(CoopInfError):
    pass


class NotDoublyStochastic(CoopInfError):
    pass


class MassImbalance(CoopInfError):
    pass


class AllForbidden(CoopInfError):
    pass


class WrongPattern(CoopInfError):
    pass


class NegativeResult(CoopInfError):
    pass


class DegenerateResult(CoopInfError):
    pass


class LimitMismatch(CoopInfError):
    pass


class InvariantViolation(RuntimeError):
    """A result failed a check that the theory guarantees for exact arithmetic."""


class InconsistentFactors(InvariantViolation):
    pass


class NoPerfectMatching(InvariantViolation):
    pass
