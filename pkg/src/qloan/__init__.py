"""Loan schedules as commuting diagonal operators on an M-period state space,
with SO(M) basis rotations that reshape the payment plan while preserving the
totals, an inverse designer that searches rotation angles for target
schedules, and inflation-indexed variants."""

from .core import (
    FRENCH,
    GERMAN,
    FixedAmortizations,
    FixedInstallments,
    LoanSpec,
    MonotonicityReport,
    RateModel,
    Schedule,
    debt_monotonicity_check,
    french_closed_forms,
    french_installment,
    german_closed_forms,
    simulate_unchecked,
    solve_recurrence,
    totals,
    total_paid_french,
    total_paid_german,
    validate_schedule,
)
from .designer import (
    CapPayment,
    CompensationReport,
    DesignProblem,
    DesignSolution,
    Equalize,
    LinearConstraint,
    OptimizerConfig,
    RegionGrid,
    SolutionStatus,
    TargetSchedule,
    compensation_report,
    equalize_installments,
    sign_pattern_region,
    solve_design,
)
from .errors import (
    DegenerateNormalization,
    DimensionMismatch,
    IndexOutOfRange,
    Infeasible,
    InsufficientData,
    InvalidModel,
    InvalidPattern,
    InvalidSchedule,
    InvalidSpec,
    NegativeRadicand,
    NonNormalizedDensity,
    NonTerminatingLoan,
    QloanError,
    SingularParametrization,
)
from .indexed import (
    ExplicitIndex,
    GeometricIndex,
    IndexFit,
    IndexedSchedule,
    InflationDensity,
    LinearIndex,
    PowerLawIndex,
    debt_peak,
    effective_rates,
    expected_rotated_installments,
    fit_index,
    index_series,
    indexed_schedule,
    rotated_indexed_installments,
    unit_value,
)
from .operators import (
    AlgebraReport,
    LoanOperators,
    build_operators,
    check_algebra,
    ladder_apply,
    mean_value,
    state_reconstruction_check,
)
from .rotation import (
    M3Comparison,
    RotatedSchedule,
    RotationSpec,
    compare_m3_closed_form,
    generator_count,
    m3_installments_closed_form,
    plane_order,
    risk_moment_gap_m2,
    risk_variance,
    rotate_diagonal,
    rotate_operator,
    rotated_schedule,
    rotation_from_angles,
    subgroup_rotation,
)

__version__ = "0.1.0"
