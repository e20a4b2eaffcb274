"""Exception hierarchy. Every error carries a stable ``code`` string that the
CLI and HTTP service put in their error envelopes."""


class QloanError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InvalidSpec(QloanError):
    code = "invalid_spec"


class NonTerminatingLoan(QloanError):
    """The installment sequence does not drive the debt to zero at period M."""

    code = "non_terminating_loan"


class InvalidSchedule(QloanError):
    code = "invalid_schedule"


class IndexOutOfRange(QloanError, IndexError):
    code = "index_out_of_range"


class DegenerateNormalization(QloanError):
    """A ladder normalization is zero, so a basis state cannot be rebuilt by raising."""

    code = "degenerate_normalization"


class DimensionMismatch(QloanError):
    code = "dimension_mismatch"


class SingularParametrization(QloanError):
    code = "singular_parametrization"


class NegativeRadicand(QloanError):
    code = "negative_radicand"


class InvalidPattern(QloanError):
    code = "invalid_pattern"


class Infeasible(QloanError):
    """Design target cannot be met. ``code`` distinguishes the reason:
    ``target_out_of_bounds`` (outside the convex hull of the installments) or
    ``trace_mismatch`` (target sum differs from the installment total)."""

    code = "infeasible"


class InvalidModel(QloanError):
    code = "invalid_model"


class NonNormalizedDensity(QloanError):
    code = "non_normalized_density"


class InsufficientData(QloanError):
    code = "insufficient_data"
