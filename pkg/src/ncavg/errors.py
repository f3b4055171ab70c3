"""Exception types raised by the solvers.

Every error derives from :class:`NcavgError`.  The CLI maps the three
families below onto exit codes: :class:`InvalidInput` (2),
:class:`Infeasible` (3) and :class:`NoConvergence` (4).
"""


class NcavgError(Exception):
    pass


class InvalidInput(NcavgError, ValueError):
    pass


class Infeasible(NcavgError, ValueError):
    pass


class NoConvergence(NcavgError, ArithmeticError):
    pass


class ConvergenceFailure(NoConvergence):
    pass


class NotHermitian(InvalidInput):
    pass


class NotUnitary(InvalidInput):
    pass


class NotSquare(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class NotADensity(InvalidInput):
    pass


class ZeroFunctional(InvalidInput):
    pass


class OddDimension(InvalidInput):
    pass


class EvenDimension(InvalidInput):
    pass


class BadK(InvalidInput):
    pass


class BadP(InvalidInput):
    pass


class NotNormalized(InvalidInput):
    pass


class DepthTooLarge(InvalidInput):
    pass


class TargetOutsideDisk(Infeasible):
    pass


class DimensionTooSmall(Infeasible):
    pass


class UnreachableTarget(Infeasible):
    pass


class EmptyProjection(Infeasible):
    pass
