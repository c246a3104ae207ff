"""Exception hierarchy shared by every module of the package."""


class EnergyMissingError(Exception):
    """Base class for all errors raised by energy_missing."""


class ShapeError(EnergyMissingError, ValueError):
    """Ragged input, mismatched lengths or mismatched dimensions."""


class EmptyInputError(EnergyMissingError, ValueError):
    """A sample with zero rows or zero columns."""


class IncompleteInputError(EnergyMissingError, ValueError):
    """A fully observed sample was required but missing cells were found."""


class NoCompleteCasesError(EnergyMissingError, ValueError):
    """A complete-case computation was requested on a sample without complete rows."""


class ParameterError(EnergyMissingError, ValueError):
    """An argument lies outside its admissible range."""


class InfeasibleRateError(ParameterError):
    """A missingness rate that the mechanism cannot realise."""


class UnimputableColumnError(EnergyMissingError, ValueError):
    """A column without a single observed value cannot be imputed."""


class FactorizationError(EnergyMissingError, ValueError):
    """A covariance matrix is not symmetric positive definite."""


class CalibrationError(EnergyMissingError, RuntimeError):
    """Logistic intercept bisection failed to converge."""


class OracleError(EnergyMissingError, RuntimeError):
    """Numerical quadrature did not reach the requested accuracy."""


class IngestionError(EnergyMissingError, ValueError):
    """A data file is missing a column, is empty, or holds non-numeric cells."""


class ScenarioError(EnergyMissingError, ValueError):
    """A scenario document violates the schema.

    ``path`` is the offending key path, e.g. ``"missingness.p"``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ReplicateError(EnergyMissingError, RuntimeError):
    """A Monte Carlo replicate failed; carries the replicate index and its seed."""

    def __init__(self, message, replicate=None, seed=None):
        super().__init__(message)
        self.replicate = replicate
        self.seed = seed
