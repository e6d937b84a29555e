"""Exception hierarchy shared by all modules."""


class MoutardError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(MoutardError):
    pass


class GridMismatch(MoutardError):
    pass


class PositivityError(MoutardError):
    pass


class NotConductivityType(MoutardError):
    """The coefficient q fails the compatibility condition dzbar q = dz conj(q)."""


class CompatibilityError(MoutardError):
    """The two GAF solutions do not form a conjugate pair."""


class SingularOmega(MoutardError):
    """The omega potential vanishes somewhere on the grid."""


class ZeroDivisor(MoutardError):
    pass


class PreconditionError(MoutardError):
    pass


class SignatureError(MoutardError):
    """Inputs to a residual operator do not match its equation."""
