"""Exception types shared across the package."""


class PoleseqError(Exception):
    pass


# arrangement
class ZeroForm(PoleseqError):
    pass


class DuplicateForm(PoleseqError):
    pass


class BadToken(PoleseqError):
    pass


class IndexOutOfRange(PoleseqError):
    pass


class EmptyResult(PoleseqError):
    pass


class NotEssential(PoleseqError):
    pass


class GenericityFailed(PoleseqError):
    pass


# linalg
class NotContained(PoleseqError):
    """Boundary space not contained in cycle space: upstream logic bug."""


class NotWellDefined(PoleseqError):
    """An induced map is not well defined on the subquotients."""


# graded / resolution
class DegreeUnavailable(PoleseqError):
    pass


class CutoffTooSmall(PoleseqError):
    pass


class ChainViolation(PoleseqError):
    """A paper-mandated regularity equality failed: abort the verify suite."""


# specseq
class ZigzagObstructed(PoleseqError):
    pass


# saturation
class NoStabilization(PoleseqError):
    pass


# cli
class UnknownBuiltin(PoleseqError):
    pass
