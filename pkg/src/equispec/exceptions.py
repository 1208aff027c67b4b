"""Exception hierarchy shared by all modules."""


class EquispecError(Exception):
    """Base class for errors raised by equispec."""


class GridError(EquispecError, ValueError):
    """Invalid grid or samples not aligned with a grid."""


class NonFiniteError(EquispecError, ValueError):
    """A value that must be finite is not.

    ``index`` is the offending node (or ``None``), ``x`` the position when known.
    """

    def __init__(self, message, index=None, x=None):
        super().__init__(message)
        self.index = index
        self.x = x


class SingularityError(EquispecError, ValueError):
    """A grid node touches the singular point of a potential."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class EigenSolveError(EquispecError, RuntimeError):
    """Eigen-decomposition failed to converge or failed its residual check."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IntegrationError(EquispecError, RuntimeError):
    """ODE integration failed; ``last_x`` is the last accepted abscissa."""

    def __init__(self, message, last_x=None):
        super().__init__(message)
        self.last_x = last_x


class StepUnderflowError(IntegrationError):
    """Adaptive step size fell below the configured minimum."""


class BranchInfeasibleError(EquispecError, ValueError):
    """The radicand of the second first integral is negative at the anchor."""


class ResidualError(EquispecError, RuntimeError):
    """Residual certification of a generated potential failed."""

    def __init__(self, message, worst_index=None, worst_x=None, worst_value=None):
        super().__init__(message)
        self.worst_index = worst_index
        self.worst_x = worst_x
        self.worst_value = worst_value


class UnsupportedFamilyError(EquispecError, ValueError):
    """Operation not available for this potential family."""


class DatasetError(EquispecError, ValueError):
    """Malformed experimental dataset; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
