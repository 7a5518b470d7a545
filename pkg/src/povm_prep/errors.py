"""Exception hierarchy and diagnostic codes.

Every error class carries a ``code`` that the CLI reports verbatim, and an
``exit_status`` grouping it into config / domain / numerical failures.
Non-fatal conditions are reported as :class:`Diagnostic` values instead.
"""

from __future__ import annotations

import enum


class Diagnostic(str, enum.Enum):
    """Non-fatal conditions attached to results."""

    RANK_DEFICIENT = "RankDeficient"
    UNPHYSICAL = "Unphysical"
    COS_PHI3_ZERO = "CosPhi3Zero"
    SWAPPED_POLAR_ANGLES = "SwappedPolarAngles"
    MULTI_BRANCH = "MultiBranch"
    INCOMPLETE_RESOLUTION = "IncompleteResolution"
    USELESS_REPEAT = "UselessRepeat"
    NO_GLOBAL_MINIMUM = "NoGlobalMinimum"
    UNVALIDATED_FAMILY = "UnvalidatedFamily"


class PovmPrepError(Exception):
    code = "Error"
    exit_status = 3


class ConfigError(PovmPrepError, ValueError):
    code = "ConfigError"
    exit_status = 1


class DomainError(PovmPrepError, ValueError):
    """A request that is well formed but has no admissible answer."""

    code = "DomainError"
    exit_status = 2


class NumericalError(PovmPrepError, ArithmeticError):
    code = "NumericalError"
    exit_status = 3


class InvalidAngle(DomainError):
    code = "InvalidAngle"


class InvalidVector(DomainError):
    code = "InvalidVector"


class InvalidSet(DomainError):
    code = "InvalidSet"


class GramNotDiagonal(DomainError):
    code = "GramNotDiagonal"


class ZeroDenominator(DomainError):
    code = "ZeroDenominator"


class NotOnSimplex(DomainError):
    code = "NotOnSimplex"


class Unattainable(DomainError):
    """Self-consistency cannot be met: ``|cos theta_a| > 1`` for some outcome."""

    code = "Unattainable"

    def __init__(self, message: str, index: int | None = None, cos_value: float | None = None):
        super().__init__(message)
        self.index = index
        self.cos_value = cos_value


class OutOfWindow(DomainError):
    code = "OutOfWindow"

    def __init__(self, message: str, condition: str | None = None):
        super().__init__(message)
        self.condition = condition


class IncompatibleFamily(DomainError):
    code = "IncompatibleFamily"


class SingularMatrix(NumericalError):
    code = "SingularMatrix"


class SingularOverlap(NumericalError):
    code = "SingularOverlap"


class NotHermitian(NumericalError):
    code = "NotHermitian"


class NegativeEigenvalue(NumericalError):
    code = "NegativeEigenvalue"


def all_error_classes() -> list[type[PovmPrepError]]:
    """Every concrete error class, depth first."""
    out: list[type[PovmPrepError]] = []
    stack = [PovmPrepError]
    while stack:
        cls = stack.pop()
        out.append(cls)
        stack.extend(cls.__subclasses__())
    return out
