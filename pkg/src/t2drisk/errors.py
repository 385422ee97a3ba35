"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: cohort/config/evaluation problems are
data errors (exit 2), numeric failures (exit 3) cover non-convergence,
separation, and overflow guards.
"""


class T2DRiskError(Exception):
    """Base class for all package errors."""


class CohortError(T2DRiskError):
    """Malformed or inconsistent cohort data (schema, CSV, invariants)."""


class ConfigError(T2DRiskError):
    """Invalid configuration values or files."""


class EvaluationError(T2DRiskError):
    """A metric could not be computed from the given data."""


class NumericError(T2DRiskError):
    """Numeric failure during fitting or simulation."""


class ConvergenceError(NumericError):
    """Optimizer failed to converge within its iteration budget."""


class SeparationError(NumericError):
    """Monotone partial likelihood: coefficients diverge (separation)."""
