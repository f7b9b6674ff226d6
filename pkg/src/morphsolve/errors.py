class MorphsolveError(Exception):
    """Base class for solver failures."""


class DominanceError(MorphsolveError, ValueError):
    """Zero-order coefficients break a11 >= a21, a22 >= a12 or nonnegativity."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


class SingularPivotError(MorphsolveError):
    """A 2x2 pivot block lost invertibility during block elimination."""


class ConsistencyError(MorphsolveError):
    """An internal check that should hold by construction failed."""


class ConvergenceError(MorphsolveError):
    def __init__(self, message: str, history: list[float]):
        super().__init__(message)
        self.history = history


class PositivityError(ConsistencyError):
    pass
