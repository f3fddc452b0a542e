"""Exception hierarchy shared by all qmacro modules."""


class QMacroError(Exception):
    """Base class for every error raised by the library."""


class ArgumentError(QMacroError, ValueError):
    """An argument violates an operation's precondition."""


class ShapeError(ArgumentError):
    pass


class SizeError(ArgumentError):
    pass


class UnsupportedBasisError(ArgumentError):
    pass


class ContractViolation(ArgumentError):
    pass


class PreconditionError(ArgumentError):
    pass


class NumericError(QMacroError, ArithmeticError):
    """A numerical procedure failed or drifted outside its tolerance."""


class ModelRegimeError(NumericError):
    pass


class TruncationError(NumericError):
    pass


class ResolutionError(NumericError):
    pass
