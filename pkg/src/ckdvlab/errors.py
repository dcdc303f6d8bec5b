"""Exception hierarchy shared by all modules.

Each class carries an ``exit_code`` used by the command line front end.
"""


class CkdvError(Exception):
    exit_code = 7


class ParseError(CkdvError, ValueError):
    exit_code = 2


class InvalidParams(CkdvError, ValueError):
    exit_code = 3


class UnknownPreset(InvalidParams):
    pass


class UnknownCase(InvalidParams):
    pass


class ROutOfRange(InvalidParams):
    pass


class SigmaOutOfRange(InvalidParams):
    pass


class ZeroK2(InvalidParams):
    pass


class MixedFieldError(InvalidParams):
    """Arithmetic between surds of different quadratic fields."""


class NotDiagonalizable(InvalidParams):
    pass


class ZeroEigenvalue(InvalidParams):
    pass


class DegenerateA1(InvalidParams):
    pass


class PresetMismatch(InvalidParams):
    pass


class InvalidRoots(InvalidParams):
    pass


class IncompatibleBoxes(InvalidParams):
    pass


class InapplicableSpace(CkdvError):
    exit_code = 4


class NonFinite(CkdvError, ArithmeticError):
    exit_code = 5


class ExhaustedDepth(CkdvError):
    exit_code = 6
