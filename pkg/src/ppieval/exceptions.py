"""Exception hierarchy. The CLI maps each family to an exit code."""


class PPIEvalError(Exception):
    """Base class for all package errors."""


class ConfigError(PPIEvalError, ValueError):
    """Invalid parameter or configuration (CLI exit code 2)."""


class DataError(PPIEvalError, ValueError):
    """Malformed or out-of-range input data (CLI exit code 3)."""


class InfeasibleError(PPIEvalError, RuntimeError):
    """A search or construction could not reach its target (CLI exit code 4)."""


class EmptyCandidateSetError(InfeasibleError):
    """Every candidate mean on the grid was rejected."""


class DisjointIntervalsError(InfeasibleError):
    """The two components of a hedged interval do not overlap."""


class CorrelationTargetError(InfeasibleError):
    """The bank generator could not hit its correlation target.

    ``achieved_rho`` carries the closest correlation reached.
    """

    def __init__(self, message, achieved_rho=None):
        super().__init__(message)
        self.achieved_rho = achieved_rho
