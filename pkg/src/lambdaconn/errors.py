"""Exception hierarchy shared by all modules.

Three branches matter to callers (and to the CLI exit-code contract):

* ValidationError   -- malformed or inconsistent input (exit 1)
* MathConditionError -- a mathematical precondition genuinely fails (exit 2)
* PrecisionError    -- the truncation window or pole budget ran out (exit 3)
"""


class EngineError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EngineError):
    """Input is malformed or internally inconsistent."""


class ChartMismatch(ValidationError):
    """Two series living on different charts were combined."""


class MathConditionError(EngineError):
    """A documented mathematical condition does not hold for the input."""


class PrecisionError(EngineError):
    """The truncation window cannot support the requested computation."""


# -- series ----------------------------------------------------------------

class PoleCapExceeded(PrecisionError):
    pass


class PrecisionExhausted(PrecisionError):
    """An operation's honest output window collapsed to nothing."""


class NotAUnit(MathConditionError):
    pass


class ResidueObstruction(MathConditionError):
    def __init__(self, lambda_order, message=None):
        self.lambda_order = lambda_order
        super().__init__(
            message or f"nonzero x^-1 coefficient at lambda-order {lambda_order}")


class NotTopologicallyNilpotent(MathConditionError):
    pass


class NonRationalLogarithm(MathConditionError):
    pass


class IllFormedSubstitution(MathConditionError):
    pass


class NotSimpleZero(MathConditionError):
    pass


# -- spectral --------------------------------------------------------------

class InsufficientPrecision(PrecisionError):
    pass


class NotSmoothRamified(MathConditionError):
    """Cover-chart construction needs a ramified smooth curve."""


# -- gauge -----------------------------------------------------------------

class NotInvertible(MathConditionError):
    pass


class NotRegular(MathConditionError):
    pass


class NotInCommutant(MathConditionError):
    pass


class CurveMismatch(MathConditionError):
    pass


# -- wasow -----------------------------------------------------------------

class IrrationalSplitting(MathConditionError):
    pass


class NotSemisimple(MathConditionError):
    pass


class NotUnramified(MathConditionError):
    pass


# -- abelianize ------------------------------------------------------------

class ConditionViolated(MathConditionError):
    pass


class NonNormalizable(MathConditionError):
    def __init__(self, clause, message=None):
        self.clause = clause
        super().__init__(message or clause)


class NoLattice(MathConditionError):
    pass
