"""Exception hierarchy shared by all modules."""


class CritRegError(Exception):
    """Base class for library errors."""


class ZeroDeterminant(CritRegError):
    pass


class PoleHit(CritRegError):
    pass


class BranchCut(CritRegError):
    pass


class MeasureError(CritRegError):
    """Spectral measure violates a growth or sign condition."""


class InsufficientGrid(CritRegError):
    pass


class NonConvergent(CritRegError):
    pass


class DegeneratePair(CritRegError):
    pass


class FitFailed(CritRegError):
    pass


class MismatchedPair(CritRegError):
    pass


class DegenerateDenominator(CritRegError):
    pass


class DenominatorVanishes(CritRegError):
    pass


class MeasureUnavailable(CritRegError):
    pass


class PreconditionViolation(CritRegError):
    pass


class NoConvergence(CritRegError):
    pass


class RiccatiBlowup(CritRegError):
    pass


class UnknownId(CritRegError, KeyError):
    pass


class PoleOnAxis(CritRegError):
    pass


class DenominatorZero(CritRegError):
    pass


class RankDeficient(CritRegError):
    pass


class NonSelfAdjoint(CritRegError):
    pass


class NotNonnegative(CritRegError):
    pass


class MissingConstant(CritRegError):
    pass


class SchemaError(CritRegError):
    pass
