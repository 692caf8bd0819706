"""
Errors Module
Exception hierarchy shared by the library and the CLI
"""

from typing import List, Optional, Sequence


class TransversalError(Exception):
    """Base class for every failure raised by the library"""

    # 2 = input error, 3 = numerical uncertifiability
    exit_code = 3


class InputError(TransversalError, ValueError):
    """Malformed map spec, relation or flag value"""

    exit_code = 2


class PreconditionError(InputError):
    """An operation was called outside its domain"""


class ZeroPolynomial(InputError):
    """A polynomial that must be nonzero is identically zero"""


class ZeroDenominator(InputError):
    """A rational function was given a zero denominator"""


class DegenerateMoebius(InputError):
    """Möbius coefficients with vanishing determinant"""


class NonConvergence(TransversalError):
    """Root finder did not converge within its iteration budget"""

    def __init__(self, message: str, residuals: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.residuals: List[float] = [float(r) for r in (residuals or [])]


class MultiplicityMismatch(TransversalError):
    """Critical multiplicities do not add up to 2d-2 at the given tolerance"""


class OrbitHitsInfinity(TransversalError):
    """An orbit segment that must stay finite reached a pole"""


class NewtonDivergence(TransversalError):
    """Critical point continuation failed"""


class DimensionMismatch(TransversalError):
    """A numerical kernel has the wrong dimension"""


class AmbiguousCollision(TransversalError):
    """Two non-equivalent orbit points both match a new orbit point"""

    def __init__(self, message: str, candidates: Optional[Sequence] = None):
        super().__init__(message)
        self.candidates = list(candidates or [])


class HorizonExhausted(TransversalError):
    """A search reached the horizon without a decision"""

    def __init__(self, message: str, indices: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.indices = list(indices or [])


class NearPole(TransversalError):
    """Evaluation point too close to a pole"""


class CriticalValue(TransversalError):
    """Push-forward requested at a critical value"""


class PreimageAtPoleOfQ(TransversalError):
    """A preimage of the sample point sits on a pole of the differential"""


class RelationNotRealized(PreconditionError):
    """The map does not realize the requested relation"""


class UncertifiableRank(TransversalError):
    """No decisive singular value gap"""

    def __init__(self, message: str, singular_values: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.singular_values = [float(s) for s in (singular_values or [])]


class NonRepelling(TransversalError):
    """A periodic point expected to be repelling is not"""

    def __init__(self, message: str, multiplier: complex = 0j):
        super().__init__(message)
        self.multiplier = complex(multiplier)


class ChartSolveFailure(TransversalError):
    """Newton solve in critical value coordinates failed"""


class ValidationFailure(TransversalError):
    """A constructed map does not have the structure it was built for"""
