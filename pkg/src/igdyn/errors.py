"""Exception hierarchy shared by every igdyn module."""


class IgdynError(Exception):
    """Base class for all library errors."""


class DomainError(IgdynError, ValueError):
    pass


class DimensionMismatch(IgdynError, ValueError):
    pass


class QuadratureNotConverged(IgdynError, ArithmeticError):
    pass


class PriorTooNarrow(IgdynError, ValueError):
    pass


class SingularMetric(IgdynError, ArithmeticError):
    pass


class BoundaryTooClose(IgdynError, ValueError):
    pass


class DegeneratePlane(IgdynError, ValueError):
    pass


class DomainExit(IgdynError):
    """A geodesic left the parameter domain before ``tau_end``.

    The partial trajectory up to the exit is kept on ``trajectory``.
    """

    def __init__(self, tau, trajectory=None, message=None):
        self.tau = float(tau)
        self.trajectory = trajectory
        super().__init__(message or f"geodesic left the domain at tau={self.tau:.6g}")


class StepUnderflow(IgdynError, ArithmeticError):
    pass


class CurvatureEvaluationFailed(IgdynError, ArithmeticError):
    pass


class NonNegativeK(IgdynError, ValueError):
    pass


class WindowTooShort(IgdynError, ValueError):
    pass


class NonPositiveIntensity(IgdynError, ValueError):
    pass


class NonPositiveVolume(IgdynError, ValueError):
    pass


class GridTooCoarse(IgdynError, ValueError):
    pass


class InconsistentCutoff(IgdynError, ValueError):
    pass


class ConformalFactorVanishes(IgdynError, ArithmeticError):
    pass


class ConfigParseError(IgdynError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ScenarioFailed(IgdynError):
    def __init__(self, scenario, cause):
        self.scenario = scenario
        self.cause = cause
        super().__init__(f"scenario {scenario!r} failed: {type(cause).__name__}: {cause}")
