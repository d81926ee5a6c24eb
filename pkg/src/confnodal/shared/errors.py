"""Exception taxonomy and warning categories.

Every error carries the process exit code the CLI maps it to:
1 config, 2 constraint, 3 numeric, 4 acceptance.
"""

from __future__ import annotations

from typing import Any


class ConfnodalError(Exception):
    exit_code = 1


class ConfigError(ConfnodalError):
    exit_code = 1


# --- Constraint violations (exit 2) ---

class ConstraintError(ConfnodalError):
    exit_code = 2


class DomainError(ConstraintError):
    pass


class MeanZeroError(ConstraintError):
    def __init__(self, mean: float, tolerance: float):
        self.mean = mean
        self.tolerance = tolerance
        super().__init__(
            f"p violates the mean-zero constraint: d_alpha-integral of p is {mean:.3e} "
            f"(tolerance {tolerance:.0e})"
        )


class ConstantPotentialError(ConstraintError):
    def __init__(self, variance: float):
        self.variance = variance
        super().__init__(
            f"p is constant (sample variance {variance:.3e}); the pencil requires a "
            "non-constant p with zero d_alpha-mean. Use allow_constant_p only for "
            "forward-solver calibration."
        )


class DegenerateDenominatorError(ConstraintError):
    def __init__(self, message: str, partial: Any = None):
        self.partial = partial
        super().__init__(message)


class NodalDataError(ConstraintError):
    pass


class LambdaCapError(ConstraintError):
    def __init__(self, lam: float, cap: float):
        self.lam = lam
        self.cap = cap
        super().__init__(
            f"|lambda| = {lam:.6g} exceeds the configured cap {cap:.6g}; raise "
            "lambda_cap together with the grid size"
        )


# --- Numeric failures (exit 3) ---

class NumericError(ConfnodalError):
    exit_code = 3


class IntegrationOverflowError(NumericError):
    def __init__(self, lam: float, t: float):
        self.lam = lam
        self.t = t
        super().__init__(f"non-finite state while shooting at lambda={lam:.10g}, reached t={t:.6g}")


class IndexingError(NumericError):
    def __init__(self, n: int, scanned: int, detail: str = ""):
        self.n = n
        self.scanned = scanned
        msg = f"cannot index eigenvalue n={n}: dense scan found {scanned} zeros"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class NodalCountError(NumericError):
    def __init__(self, n: int, expected: int, actual: int):
        self.n = n
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"eigenfunction n={n} has {actual} interior sign changes, expected {expected}; "
            "the grid is under-resolved, rerun with --refine or a larger CONFNODAL_GRID"
        )


class ResolutionError(NumericError):
    pass


class AsymptoticFailure(NumericError):
    pass


# --- Acceptance (exit 4) ---

class AcceptanceError(ConfnodalError):
    exit_code = 4

    def __init__(self, metric: str, value: float, threshold: float):
        self.metric = metric
        self.value = value
        self.threshold = threshold
        super().__init__(f"acceptance failed: {metric} = {value:.4g} (threshold {threshold:.4g})")


# --- Warnings ---

class ConfnodalWarning(UserWarning):
    pass


class PowerAmbiguityWarning(ConfnodalWarning):
    """Fractional power of a negative base, evaluated as sgn(b)|b|^e."""


class LimitFormWarning(ConfnodalWarning):
    """D^alpha at x=0 taken from a one-sided extrapolation."""


class NearDoubleZeroWarning(ConfnodalWarning):
    pass


class EdgeBiasWarning(ConfnodalWarning):
    pass


class GridRefinementWarning(ConfnodalWarning):
    pass


class Step4SpreadWarning(ConfnodalWarning):
    """Pointwise estimates of the mean of q disagree along t.

    The identity behind Step 4 holds at every t only when g and the Step 4
    endpoint convention match; a wide spread means they do not.
    """
