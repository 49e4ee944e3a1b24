"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): ``InputError``
for malformed or inconsistent inputs, ``NumericalContractError`` for results
that fail a numerical guarantee (normalization, positivity, residue bounds).
"""


class TomoprobError(Exception):
    """Base class for all package errors."""


class InputError(TomoprobError, ValueError):
    """Bad input: wrong shape, wrong dimension, unsupported parameters."""


class NumericalContractError(TomoprobError, ArithmeticError):
    """A computed quantity violates a stated numerical contract."""


class GridTooSmallError(InputError):
    pass


class GridMismatchError(InputError):
    pass


class NotHermitianError(InputError):
    pass


class DimensionMismatchError(InputError):
    pass


class BudgetExceededError(InputError):
    pass


class NormalizationError(NumericalContractError):
    pass


class UndersamplingError(NumericalContractError):
    """Oscillatory kernel advances too fast per grid step to be integrated."""


class LineExitsGridError(NumericalContractError):
    pass


class InsufficientDecayError(NumericalContractError):
    pass


class ImaginaryResidueError(NumericalContractError):
    pass


class RankDeficientError(NumericalContractError):
    pass


class ConsistencyError(NumericalContractError):
    pass


class FrameOutOfRangeError(NumericalContractError):
    pass
