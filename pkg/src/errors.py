from typing import Optional, Sequence


class BendcheckError(Exception):
    pass


class ExpressionSyntaxError(BendcheckError, ValueError):

    def __init__(self, message: str, position: int = -1):
        self.position = position
        if position >= 0:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownSymbolError(ExpressionSyntaxError):
    pass


class VariableRangeError(ExpressionSyntaxError):
    pass


class DomainViolation(BendcheckError, ArithmeticError):

    def __init__(self, reason: str, subexpression: str, point: Optional[Sequence[float]] = None):
        self.reason = reason
        self.subexpression = subexpression
        self.point = None if point is None else [float(c) for c in point]
        super().__init__(f"{reason} in {subexpression} at {self.point}")


class RankDeficiencyError(BendcheckError, ValueError):

    def __init__(self, smallest: float, largest: float, point: Optional[Sequence[float]] = None):
        self.smallest_singular_value = float(smallest)
        self.largest_singular_value = float(largest)
        self.point = None if point is None else [float(c) for c in point]
        super().__init__(
            f"Differential is rank deficient at {self.point}: "
            f"sigma_min={self.smallest_singular_value:.3e}, sigma_max={self.largest_singular_value:.3e}"
        )


class MetricSignatureError(BendcheckError, ValueError):
    pass


class TangentialComponentError(BendcheckError, ValueError):
    pass


class PreconditionError(BendcheckError, ValueError):
    pass


class ChartExitError(PreconditionError):
    pass


class DecompositionFailure(BendcheckError, RuntimeError):
    pass


class SceneValidationError(BendcheckError, ValueError):

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        self.message = message
        super().__init__(f"{pointer}: {message}")
