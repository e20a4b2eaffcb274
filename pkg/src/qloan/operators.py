"""Finite-dimensional operator representation of a loan.

A loan of duration M lives on an M-dimensional real vector space with basis
states |1>..|M>, one per period. Debt, amortization, interest and installment
are commuting diagonal operators whose eigenvalue at |n> is the period-n value
(the debt operator carries d_1..d_M, so its top eigenvalue is d_M = 0).
Ladder operators step between period states with normalizations
N_j^2 = sum_{i<j} a_i, and the whole recurrence structure is encoded in a
closed set of commutation relations that :func:`check_algebra` verifies
numerically, Jacobi identities included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RateModel, Schedule, validate_schedule
from .errors import DegenerateNormalization, IndexOutOfRange, InvalidSchedule

OPERATOR_NAMES = ("debt", "amortization", "interest", "installment")


@dataclass(frozen=True)
class LoanOperators:
    """Diagonal loan operators plus the ladder pair, all dense M x M reals."""

    dim: int
    d0: float
    debt: np.ndarray
    amortization: np.ndarray
    interest: np.ndarray
    installment: np.ndarray
    rate_factor: np.ndarray   # diagonal 1 + t_n; entry n scales d_n inside f
    norms: np.ndarray         # N_1..N_M with N_1 = 0
    lowering: np.ndarray
    raising: np.ndarray

    def diagonal(self, which: str) -> np.ndarray:
        if which not in OPERATOR_NAMES:
            raise IndexOutOfRange(f"unknown operator {which!r}, expected one of {OPERATOR_NAMES}")
        return np.diagonal(getattr(self, which)).copy()

    def rate_map(self) -> np.ndarray:
        """f(D) = (T - I) D, the interest produced by one period on each debt level."""
        return (self.rate_factor - np.eye(self.dim)) @ self.debt


def build_operators(schedule: Schedule, rate: RateModel) -> LoanOperators:
    """Assemble the operators for a terminated schedule.

    The schedule must satisfy the loan identities (total amortization d0,
    terminal debt zero); the ladder normalizations additionally need the
    partial amortization sums to be nonnegative.
    """
    validate_schedule(schedule)
    m = schedule.periods
    rates = rate.rates(m)

    norms_sq = np.concatenate(([0.0], np.cumsum(schedule.a)[:-1]))
    if np.min(norms_sq) < 0:
        raise InvalidSchedule("ladder normalizations need nonnegative partial amortization sums")
    norms = np.sqrt(norms_sq)

    # T carries the rate applied when stepping off each state: the rate of
    # period n+1 sits at state n, so y_{n+1} = f(d_n). The last entry only
    # ever multiplies d_M = 0; it is padded with the final rate.
    stepping = np.append(rates[1:], rates[-1])

    return LoanOperators(
        dim=m,
        d0=schedule.d0,
        debt=np.diag(schedule.d[1:]),
        amortization=np.diag(schedule.a),
        interest=np.diag(schedule.y),
        installment=np.diag(schedule.q),
        rate_factor=np.diag(1.0 + stepping),
        norms=norms,
        lowering=np.diag(norms[1:], 1),
        raising=np.diag(norms[1:], -1),
    )


@dataclass
class RelationCheck:
    relation: str
    residual: float
    passed: bool


@dataclass
class AlgebraReport:
    checks: list[RelationCheck]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def residual(self, relation: str) -> float:
        for c in self.checks:
            if c.relation == relation:
                return c.residual
        raise KeyError(relation)

    def to_json(self) -> list[dict]:
        return [
            {"relation": c.relation, "residual": c.residual, "pass": c.passed}
            for c in self.checks
        ]


def _comm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def _jacobi(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    return _comm(x, _comm(y, z)) + _comm(z, _comm(x, y)) + _comm(y, _comm(z, x))


def check_algebra(ops: LoanOperators, tol: float | None = None) -> AlgebraReport:
    """Verify every algebra relation as a dense matrix identity.

    Residuals are max-abs entries of (lhs - rhs); ``tol`` defaults to
    1e-10 * max(d0, 1). Both sides of each relation are assembled
    independently, so the checks are meaningful rather than circular: e.g.
    the ladder commutator is compared against A - d0 |M><M|, whose corner
    entry only agrees with -N_M^2 because total amortization equals d0.
    """
    if tol is None:
        tol = 1e-10 * max(abs(ops.d0), 1.0)
    m = ops.dim
    d, a_op, y, q = ops.debt, ops.amortization, ops.interest, ops.installment
    low, high = ops.lowering, ops.raising
    f_d = ops.rate_map()

    corner = np.zeros((m, m))
    corner[m - 1, m - 1] = ops.d0

    ladder_comm = _comm(low, high)

    residuals = {
        "commute_debt_amortization": _comm(d, a_op),
        "commute_debt_interest": _comm(d, y),
        "commute_debt_installment": _comm(d, q),
        "lower_interest": low @ y - f_d @ low,
        "interest_raise": y @ high - high @ f_d,
        "debt_lower": _comm(d, low) - low @ a_op,
        "raise_debt": _comm(high, d) - a_op @ high,
        "installment_split": q - y - a_op,
        "ladder_commutator": ladder_comm - (a_op - corner),
        "ladder_commutator_trace": np.trace(ladder_comm),
        "debt_lower_installment_form": _comm(d, low) - (low @ q - f_d @ low),
        "jacobi_debt_ladder": _jacobi(d, high, low),
        "jacobi_debt_amortization": _jacobi(d, a_op, low),
        "jacobi_debt_interest": _jacobi(d, y, low),
        "jacobi_installment_ladder": _jacobi(q, high, low),
        "jacobi_installment_amortization": _jacobi(q, a_op, low),
        "jacobi_installment_interest": _jacobi(q, y, low),
    }

    checks = []
    for name, value in residuals.items():
        r = float(np.max(np.abs(value)))
        checks.append(RelationCheck(relation=name, residual=r, passed=r < tol))
    return AlgebraReport(checks=checks, tol=tol)


def mean_value(ops: LoanOperators, which: str, n: int) -> float:
    """<n| O |n> for O one of debt/amortization/interest/installment, 1 <= n <= M."""
    if not 1 <= n <= ops.dim:
        raise IndexOutOfRange(f"period {n} outside 1..{ops.dim}")
    return float(ops.diagonal(which)[n - 1])


def ladder_apply(ops: LoanOperators, direction: str, n: int) -> tuple[float, int]:
    """Apply a ladder operator to basis state |n>.

    Returns (coefficient, target period). Lowering |1> and raising |M>
    annihilate: coefficient 0.
    """
    if not 1 <= n <= ops.dim:
        raise IndexOutOfRange(f"period {n} outside 1..{ops.dim}")
    if direction == "lower":
        return float(ops.norms[n - 1]), n - 1
    if direction == "raise":
        coeff = float(ops.norms[n]) if n < ops.dim else 0.0
        return coeff, n + 1
    raise IndexOutOfRange(f"direction must be 'lower' or 'raise', got {direction!r}")


def state_reconstruction_check(ops: LoanOperators) -> float:
    """Rebuild each |n> by repeated raising from |1> and compare debt mean values.

    Returns the largest deviation between <n|D|n> evaluated in the rebuilt
    state and the stored eigenvalue d_n. Requires every N_j (j >= 2) to be
    positive, i.e. all amortizations strictly positive.
    """
    m = ops.dim
    if m > 1 and np.min(ops.norms[1:]) <= 0.0:
        j = 2 + int(np.argmax(ops.norms[1:] <= 0.0))
        raise DegenerateNormalization(f"N_{j} vanishes; state |{j}> cannot be reached by raising")
    debt_diag = np.diagonal(ops.debt)
    v = np.zeros(m)
    v[0] = 1.0
    worst = abs(float(v @ ops.debt @ v) - debt_diag[0])
    for n in range(2, m + 1):
        v = (ops.raising @ v) / ops.norms[n - 1]
        worst = max(worst, abs(float(v @ ops.debt @ v) - debt_diag[n - 1]))
    return worst
