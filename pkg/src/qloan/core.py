"""Classical loan engine.

Solves the coupled recurrences between debt, amortization, interest and
installment (q_n = a_n + y_n, y_n = t_{n-1} d_{n-1}, d_n = d_{n-1} - a_n)
under the boundary conditions d_0 given and d_M = 0, and provides the
closed forms for the two standard amortization systems: constant installment
("french") and constant amortization ("german").

Indexing convention: debt d is indexed 0..M, the per-period sequences a, y, q
are indexed 1..M (stored 0-based). A rate array entry ``rates[i]`` is the rate
accruing during period i+1, i.e. y_{i+1} = rates[i] * d_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import math

import numpy as np

from . import _kernels
from .errors import InvalidSpec, NonTerminatingLoan, InvalidSchedule

FRENCH = "french"
GERMAN = "german"

#: |d_M| <= TERMINATION_TOL * d0 is accepted as a terminated loan.
TERMINATION_TOL = 1e-9


@dataclass(frozen=True)
class RateModel:
    """Constant or per-period interest rate, dimensionless per period."""

    constant: float | None = None
    per_period: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.constant is None) == (self.per_period is None):
            raise InvalidSpec("rate model needs exactly one of constant / per_period")
        if self.constant is not None and not self.constant > -1.0:
            raise InvalidSpec(f"constant rate must be > -1, got {self.constant}")
        if self.per_period is not None:
            object.__setattr__(self, "per_period", tuple(float(t) for t in self.per_period))
            if any(not t > -1.0 for t in self.per_period):
                raise InvalidSpec("every per-period rate must be > -1")

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def rates(self, periods: int) -> np.ndarray:
        """Rate array of length ``periods``; entry i applies during period i+1."""
        if self.constant is not None:
            return np.full(periods, float(self.constant))
        if len(self.per_period) != periods:
            raise InvalidSpec(
                f"per-period rate sequence has length {len(self.per_period)}, expected {periods}"
            )
        return np.asarray(self.per_period, dtype=float)


@dataclass(frozen=True)
class FixedInstallments:
    """User-supplied installment sequence q_1..q_M."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class FixedAmortizations:
    """User-supplied amortization sequence a_1..a_M."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


System = Union[str, FixedInstallments, FixedAmortizations]


@dataclass(frozen=True)
class LoanSpec:
    """Loan contract: initial debt, duration, rate model and amortization system."""

    d0: float
    M: int
    rate: RateModel
    system: System

    def __post_init__(self):
        if not self.d0 > 0:
            raise InvalidSpec(f"initial debt must be positive, got {self.d0}")
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            raise InvalidSpec(f"duration must be an integer >= 1, got {self.M!r}")
        if isinstance(self.system, str):
            if self.system not in (FRENCH, GERMAN):
                raise InvalidSpec(f"unknown system {self.system!r}")
        elif isinstance(self.system, (FixedInstallments, FixedAmortizations)):
            if len(self.system.values) != self.M:
                raise InvalidSpec(
                    f"system sequence has length {len(self.system.values)}, expected M={self.M}"
                )
        else:
            raise InvalidSpec(f"unknown system {self.system!r}")
        # fail early on a mismatched per-period sequence
        self.rate.rates(self.M)


@dataclass
class Schedule:
    """Per-period loan series. ``d`` has length M+1 (d_0..d_M), the rest M."""

    d: np.ndarray
    a: np.ndarray
    y: np.ndarray
    q: np.ndarray

    @property
    def periods(self) -> int:
        return len(self.q)

    @property
    def d0(self) -> float:
        return float(self.d[0])

    @property
    def total_paid(self) -> float:
        return float(np.sum(self.q))

    @property
    def total_amortized(self) -> float:
        return float(np.sum(self.a))


def validate_schedule(schedule: Schedule, rates: np.ndarray | None = None,
                      tol: float = TERMINATION_TOL) -> None:
    """Check the schedule identities; raises :class:`InvalidSchedule` on failure."""
    m = schedule.periods
    d0 = schedule.d0
    scale = max(abs(d0), 1.0)
    if len(schedule.d) != m + 1 or len(schedule.a) != m or len(schedule.y) != m:
        raise InvalidSchedule("sequence lengths are inconsistent")
    if abs(schedule.d[m]) > tol * scale:
        raise InvalidSchedule(f"terminal debt {schedule.d[m]!r} not zero within tolerance")
    if abs(schedule.total_amortized - d0) > 1e-10 * scale:
        raise InvalidSchedule("total amortization does not equal the initial debt")
    if np.max(np.abs(schedule.q - schedule.a - schedule.y)) > 1e-12 * scale:
        raise InvalidSchedule("q_n = a_n + y_n violated")
    if np.max(np.abs(schedule.d[:-1] - schedule.a - schedule.d[1:])) > 1e-12 * scale:
        raise InvalidSchedule("d_n = d_{n-1} - a_n violated")
    if rates is not None:
        if np.max(np.abs(schedule.y - rates * schedule.d[:-1])) > 1e-9 * scale:
            raise InvalidSchedule("y_n = t_{n-1} d_{n-1} violated")


def french_installment(d0: float, t: float, periods: int) -> float:
    """Constant installment that repays ``d0`` over ``periods`` at rate ``t``.

    q = d0 t (1+t)^M / ((1+t)^M - 1), with the t -> 0 limit d0 / M. The
    denominator is evaluated as expm1(M log1p(t)): forming (1+t)^M - 1 by
    subtraction loses the low bits of t itself for small rates.
    """
    if not t > -1.0:
        raise InvalidSpec(f"rate must be > -1, got {t}")
    if periods < 1:
        raise InvalidSpec("periods must be >= 1")
    denom = math.expm1(periods * math.log1p(t))
    if denom == 0.0:  # t == 0
        return d0 / periods
    # the ratio t/denom is O(1/M); forming d0*t first can land in the
    # subnormal range for extreme rates and quantize badly
    return d0 * (t / denom) * (denom + 1.0)


def _constant_installment(d0: float, rates: np.ndarray) -> float:
    """Constant q with d_M = 0 for a per-period rate sequence: q = d0 / sum_n 1/P_n
    where P_n is the cumulative growth factor through period n."""
    growth = np.cumprod(1.0 + rates)
    return d0 / np.sum(1.0 / growth)


def _assemble_from_debt(d: np.ndarray, y: np.ndarray) -> Schedule:
    a = -np.diff(d)
    return Schedule(d=d, a=a, y=y, q=a + y)


def _assemble_from_installments(d: np.ndarray, q: np.ndarray) -> Schedule:
    a = -np.diff(d)
    return Schedule(d=d, a=a, y=q - a, q=q)


def _simulate(spec: LoanSpec, check: bool) -> Schedule:
    d0 = float(spec.d0)
    m = spec.M
    rates = spec.rate.rates(m)
    system = spec.system

    if system == FRENCH:
        if spec.rate.is_constant:
            q_val = french_installment(d0, spec.rate.constant, m)
        else:
            q_val = _constant_installment(d0, rates)
        q = np.full(m, q_val)
        # anchored at d_M = 0; the forward direction is unstable for large t*M
        d = _kernels.debt_backward(rates, q)
        d[0] = d0
        return _assemble_from_installments(d, q)

    if system == GERMAN:
        a = np.full(m, d0 / m)
        d = np.empty(m + 1)
        d[0] = d0
        d[1:] = d0 - np.cumsum(a)
        return _assemble_from_debt(d, rates * d[:-1])

    if isinstance(system, FixedAmortizations):
        a = np.asarray(system.values, dtype=float)
        d = np.empty(m + 1)
        d[0] = d0
        d[1:] = d0 - np.cumsum(a)
        if check:
            _check_termination(d, d0)
        return _assemble_from_debt(d, rates * d[:-1])

    q = np.asarray(system.values, dtype=float)
    d = _kernels.debt_forward(d0, rates, q)
    if check:
        _check_termination(d, d0)
    return _assemble_from_installments(d, q)


def _check_termination(d: np.ndarray, d0: float) -> None:
    m = len(d) - 1
    if abs(d[m]) > TERMINATION_TOL * d0:
        verb = "overpays" if d[m] < 0 else "leaves residual debt"
        raise NonTerminatingLoan(
            f"supplied sequence {verb}: d_M = {d[m]!r} (duration is contractual, not extended)"
        )
    interior = d[1:m]
    if interior.size and np.min(interior) < -TERMINATION_TOL * d0:
        n_bad = 1 + int(np.argmax(interior < -TERMINATION_TOL * d0))
        raise NonTerminatingLoan(f"supplied sequence overpays: debt goes negative at period {n_bad}")


def solve_recurrence(spec: LoanSpec) -> Schedule:
    """Solve the full schedule for any system.

    French/german derive their installment/amortization sequence internally.
    User-supplied sequences are simulated forward and must drive the debt to
    zero at period M (within ``TERMINATION_TOL * d0``), else
    :class:`NonTerminatingLoan` is raised; interim overpayment (negative debt)
    is rejected the same way.
    """
    return _simulate(spec, check=True)


def simulate_unchecked(spec: LoanSpec) -> Schedule:
    """Like :func:`solve_recurrence` but skips the termination checks.

    Useful for diagnostics on sequences that are not valid repayment plans,
    e.g. :func:`debt_monotonicity_check` on a too-small constant installment.
    """
    return _simulate(spec, check=False)


def french_closed_forms(spec: LoanSpec) -> Schedule:
    """Closed-form french schedule (constant rate required).

    d_n = d0 [(1+t)^M - (1+t)^n] / ((1+t)^M - 1)
    a_n = t d0 (1+t)^(n-1) / ((1+t)^M - 1)
    y_n = t d_{n-1}

    The amortization is evaluated in the factored form above rather than as
    (1+t)^(n-1) (q - t d0): the latter subtraction cancels catastrophically
    when (1+t)^M is huge. Both are the same thing algebraically, as is the
    geometric-progression identity a_n = (1+t) a_{n-1}.
    """
    if not spec.rate.is_constant:
        raise InvalidSpec("closed forms require a constant rate")
    if spec.system != FRENCH:
        raise InvalidSpec("spec system is not french")
    d0, t, m = float(spec.d0), float(spec.rate.constant), spec.M
    n = np.arange(m + 1)
    log_growth = math.log1p(t)
    # (1+t)^M - (1+t)^n factored as (1+t)^n ((1+t)^(M-n) - 1): products only,
    # no cancellation at either end of the rate range
    growth_gap = np.expm1((m - n) * log_growth)
    denom = growth_gap[0]
    if denom == 0.0:  # zero-interest limit
        d = d0 * (1.0 - n / m)
        a = np.full(m, d0 / m)
        return Schedule(d=d, a=a, y=np.zeros(m), q=a.copy())
    d = d0 * (np.exp(n * log_growth) * growth_gap / denom)
    a = d0 * (t / denom) * np.exp(n[:m] * log_growth)
    y = t * d[:m]
    return Schedule(d=d, a=a, y=y, q=a + y)


def german_closed_forms(spec: LoanSpec) -> Schedule:
    """Closed-form german schedule (constant rate required).

    d_n = d0 (1 - n/M),  y_n = t d0 (1 - (n-1)/M),  q_n = d0/M + t (d0/M) (M-n+1).
    """
    if not spec.rate.is_constant:
        raise InvalidSpec("closed forms require a constant rate")
    if spec.system != GERMAN:
        raise InvalidSpec("spec system is not german")
    d0, t, m = float(spec.d0), float(spec.rate.constant), spec.M
    n = np.arange(m + 1)
    d = d0 * (1.0 - n / m)
    a = np.full(m, d0 / m)
    y = t * d0 * (1.0 - (n[1:] - 1) / m)
    q = a + t * (d0 / m) * (m - n[1:] + 1)
    return Schedule(d=d, a=a, y=y, q=q)


def totals(schedule: Schedule) -> tuple[float, float]:
    """(total paid, total amortized). The second equals d0 for a terminated loan."""
    return schedule.total_paid, schedule.total_amortized


def total_paid_french(d0: float, t: float, periods: int) -> float:
    """Q_F = q M."""
    return french_installment(d0, t, periods) * periods


def total_paid_german(d0: float, t: float, periods: int) -> float:
    """Q_G = (d0/2) [2 + t (1 + M)]."""
    return 0.5 * d0 * (2.0 + t * (1.0 + periods))


@dataclass
class MonotonicityReport:
    """Diagnostic on the direction of the debt curve.

    With a constant installment q and constant rate t the debt grows whenever
    t > q/d0; when the installment is fixed by the d_M = 0 boundary that
    inequality reduces to t > 0 never holding against the boundary value, so
    boundary-fixed loans always decrease.
    """

    flagged: bool
    increasing_periods: list[int] = field(default_factory=list)
    rate: float | None = None
    threshold_rate: float | None = None

    @property
    def debt_decreases(self) -> bool:
        return not self.flagged


def debt_monotonicity_check(schedule: Schedule, spec: LoanSpec) -> MonotonicityReport:
    """Flag periods where the debt grew instead of shrinking."""
    scale = max(schedule.d0, 1.0)
    rising = np.flatnonzero(np.diff(schedule.d) > 1e-12 * scale)
    rate = spec.rate.constant if spec.rate.is_constant else None
    threshold = None
    if isinstance(spec.system, FixedInstallments):
        qs = spec.system.values
        if len(set(qs)) == 1:
            threshold = qs[0] / spec.d0
    return MonotonicityReport(
        flagged=rising.size > 0,
        increasing_periods=[int(n) + 1 for n in rising],
        rate=rate,
        threshold_rate=threshold,
    )
