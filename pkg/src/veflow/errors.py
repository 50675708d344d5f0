"""Exception types shared across the package."""


class VeflowError(Exception):
    """Base class for all package-specific failures."""


class ParameterError(VeflowError):
    """Rejected model or solver parameters; message names the failed condition."""


class GridMismatchError(VeflowError):
    """Operands live on different grids."""


class FieldError(VeflowError):
    """Malformed field data: non-finite values, broken symmetry, wrong shape."""


class VacuumError(VeflowError):
    """State left the admissible neighbourhood (near-vacuum or degenerate deformation).

    Carries the offending state, when available, so callers can dump it.
    """

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class QuadratureError(VeflowError):
    """Radial quadrature could not reach the requested accuracy."""


class InitialDataError(VeflowError):
    """Initial-data generator rejected its inputs."""
