"""Inverse schedule design: search rotation angles for target payment patterns.

The forward map sends an angle vector to the rotated installments
qbar = W(angles) @ q with W the squared entries of the composed rotation.
Anything reachable is a doubly stochastic mixture of the original
installments, which gives two cheap necessary conditions checked before any
iteration: each target must lie in [min q, max q], and the target sum must
equal the installment total (rotations never change what the lender earns).

The search itself is penalized least squares over the angle vector with
central finite-difference gradients and deterministic multi-start; the zero
start alone is not enough because the identity is a stationary point of the
diagonal map (first-order diagonal response to any single plane angle
vanishes), so seeded starts do the real work.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import least_squares

from . import _kernels
from .errors import DimensionMismatch, IndexOutOfRange, Infeasible, InvalidPattern, InvalidSpec
from .operators import LoanOperators
from .rotation import (
    RotationSpec,
    generator_count,
    plane_order,
    rotate_diagonal,
    rotation_from_angles,
)


@dataclass(frozen=True)
class Equalize:
    """Make every rotated installment equal (necessarily to total/M)."""


@dataclass(frozen=True)
class TargetSchedule:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class CapPayment:
    """Keep payment ``period`` at or below ``cap`` while staying close to the
    original schedule elsewhere."""

    period: int
    cap: float


Objective = Union[Equalize, TargetSchedule, CapPayment]


@dataclass(frozen=True)
class LinearConstraint:
    """coeffs . qbar <= bound, enforced through a penalty residual."""

    coeffs: tuple[float, ...]
    bound: float


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 8
    base_seed: int = 2024
    fd_step: float = 1e-6          # radians, absolute central-difference step
    max_evaluations: int = 4000
    penalty_weight: float = 1e4
    weights: tuple[float, ...] | None = None
    optimal_tol_rel: float = 1e-8  # residual below this (times trace scale) counts as optimal
    early_stop_rel: float = 1e-12  # stop scanning starts once this is reached


class SolutionStatus(enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class DesignProblem:
    ops: LoanOperators
    objective: Objective
    constraints: tuple[LinearConstraint, ...] = ()
    planes: tuple[tuple[int, int], ...] | None = None  # restrict to these rotation planes


@dataclass
class DesignSolution:
    angles: np.ndarray    # full angle vector, length M(M-1)/2
    achieved: np.ndarray  # rotated installments at the returned angles
    residual: float       # max |qbar - target| (cap violation for CapPayment)
    status: SolutionStatus

    def rotation(self, dim: int) -> RotationSpec:
        return rotation_from_angles(dim, self.angles)


def _plane_indices(dim: int, planes) -> np.ndarray:
    order = plane_order(dim)
    idx = []
    for plane in planes:
        plane = (int(plane[0]), int(plane[1]))
        if plane not in order:
            raise IndexOutOfRange(f"plane {plane} invalid for dim {dim}")
        idx.append(order.index(plane))
    return np.array(sorted(set(idx)), dtype=np.int64)


def _feasibility_check(q: np.ndarray, target: np.ndarray, scale: float) -> None:
    lo, hi = float(np.min(q)), float(np.max(q))
    slack = 1e-9 * scale
    if np.min(target) < lo - slack or np.max(target) > hi + slack:
        raise Infeasible(
            f"target leaves the convex hull of the installments [{lo!r}, {hi!r}]",
            code="target_out_of_bounds",
        )
    if abs(float(np.sum(target)) - float(np.sum(q))) > slack:
        raise Infeasible(
            f"target sum {float(np.sum(target))!r} differs from the installment total "
            f"{float(np.sum(q))!r}; rotations preserve it",
            code="trace_mismatch",
        )


def _central_diff_jacobian(fun, step: float):
    def jac(x, *args):
        f0 = fun(x)
        out = np.empty((f0.shape[0], x.shape[0]))
        for k in range(x.shape[0]):
            xp = x.copy()
            xp[k] += step
            xm = x.copy()
            xm[k] -= step
            out[:, k] = (fun(xp) - fun(xm)) / (2.0 * step)
        return out

    return jac


def solve_design(problem: DesignProblem, config: OptimizerConfig = OptimizerConfig()) -> DesignSolution:
    """Angle search for the problem's objective.

    Deterministic: the multi-start seeds derive from ``config.base_seed`` and
    the winner is reduced by (residual, |angles|_2, start index), so the same
    problem and config always return the same bits. Infeasible targets are
    rejected before iteration with error codes ``target_out_of_bounds`` /
    ``trace_mismatch``.
    """
    ops = problem.ops
    dim = ops.dim
    q = ops.diagonal("installment")
    trace = float(np.sum(q))
    scale = max(abs(trace), 1.0)

    objective = problem.objective
    cap_index = None
    cap_value = None
    if isinstance(objective, Equalize):
        target = np.full(dim, trace / dim)
    elif isinstance(objective, TargetSchedule):
        target = np.asarray(objective.values, dtype=float)
        if target.shape != (dim,):
            raise DimensionMismatch(f"target length {target.shape} does not match M={dim}")
        _feasibility_check(q, target, scale)
    elif isinstance(objective, CapPayment):
        if not 1 <= objective.period <= dim:
            raise IndexOutOfRange(f"period {objective.period} outside 1..{dim}")
        if not objective.cap > 0:
            raise InvalidSpec(f"cap must be positive, got {objective.cap}")
        if objective.cap < float(np.min(q)) - 1e-9 * scale:
            raise Infeasible(
                f"cap {objective.cap!r} lies below the smallest installment {float(np.min(q))!r}",
                code="target_out_of_bounds",
            )
        target = q.copy()  # track the original schedule where the cap allows
        cap_index = objective.period - 1
        cap_value = float(objective.cap)
    else:
        raise InvalidSpec(f"unknown objective {objective!r}")

    g = generator_count(dim)
    planes = plane_order(dim) if problem.planes is None else problem.planes
    param_idx = _plane_indices(dim, planes)
    if param_idx.size == 0:
        raise InvalidSpec("at least one rotation plane is required")

    all_planes = plane_order(dim)
    plane_i = np.array([i - 1 for i, _ in all_planes], dtype=np.int64)
    plane_j = np.array([j - 1 for _, j in all_planes], dtype=np.int64)
    w = np.ones(dim) if config.weights is None else np.asarray(config.weights, dtype=float)
    if w.shape != (dim,):
        raise DimensionMismatch("weight vector length does not match M")
    sqrt_w = np.sqrt(w)
    sqrt_pen = math.sqrt(config.penalty_weight)
    constraints = problem.constraints

    def qbar_of(params: np.ndarray) -> np.ndarray:
        angles = np.zeros(g)
        angles[param_idx] = params
        u = _kernels.givens_compose(dim, plane_i, plane_j, angles)
        return (u * u) @ q

    def make_residuals(pen: float):
        def residuals(params: np.ndarray) -> np.ndarray:
            qbar = qbar_of(params)
            parts = [sqrt_w * (qbar - target)]
            if cap_index is not None:
                parts.append(np.array([pen * max(0.0, qbar[cap_index] - cap_value)]))
            for con in constraints:
                gap = float(np.dot(con.coeffs, qbar)) - con.bound
                parts.append(np.array([pen * max(0.0, gap)]))
            return np.concatenate(parts)

        return residuals

    def penalty_violation(qbar: np.ndarray) -> float:
        worst = 0.0
        if cap_index is not None:
            worst = max(worst, float(qbar[cap_index]) - cap_value)
        for con in constraints:
            worst = max(worst, float(np.dot(con.coeffs, qbar)) - con.bound)
        return max(0.0, worst)

    def solution_residual(qbar: np.ndarray) -> float:
        if cap_index is not None:
            return penalty_violation(qbar)
        return float(np.max(np.abs(qbar - target)))

    def minimize(x0: np.ndarray, pen: float):
        residuals = make_residuals(pen)
        return least_squares(
            residuals, x0, jac=_central_diff_jacobian(residuals, config.fd_step),
            method="trf", max_nfev=config.max_evaluations,
            xtol=1e-15, ftol=1e-15, gtol=1e-15,
        )

    n_params = param_idx.size
    has_penalties = cap_index is not None or bool(constraints)

    best = None  # ((residual, angle_norm, start_index), params, converged)
    for k in range(config.starts):
        if k == 0:
            x0 = np.zeros(n_params)
        else:
            rng = np.random.default_rng(config.base_seed + k)
            x0 = rng.uniform(-np.pi / 2, np.pi / 2, n_params)
        fit = minimize(x0, sqrt_pen)
        resid = solution_residual(qbar_of(fit.x))
        key = (resid, float(np.linalg.norm(fit.x)), k)
        if best is None or key < best[0]:
            best = (key, fit.x, fit.status != 0)
        if resid <= config.early_stop_rel * scale:
            break

    if has_penalties:
        # a quadratic penalty equilibrates at violation ~ pull/weight; escalate
        # deterministically from the winner until the inequalities bind tightly
        pen = sqrt_pen
        for _ in range(2):
            if penalty_violation(qbar_of(best[1])) <= 1e-8 * scale:
                break
            pen *= 1e3
            fit = minimize(best[1], pen)
            resid = solution_residual(qbar_of(fit.x))
            key = (resid, float(np.linalg.norm(fit.x)), best[0][2])
            best = (key, fit.x, fit.status != 0)

    (resid, _, _), params, converged = best
    angles = np.zeros(g)
    angles[param_idx] = params
    achieved = qbar_of(params)
    if abs(float(np.sum(achieved)) - trace) > 1e-9 * scale:
        raise RuntimeError("angle search produced a trace-violating schedule")

    if resid <= config.optimal_tol_rel * scale:
        status = SolutionStatus.OPTIMAL
    elif converged:
        status = SolutionStatus.FEASIBLE
    else:
        status = SolutionStatus.MAX_ITERATIONS
    return DesignSolution(angles=angles, achieved=achieved, residual=resid, status=status)


def equalize_installments(ops: LoanOperators,
                          config: OptimizerConfig = OptimizerConfig()) -> DesignSolution:
    """Angles that flatten the payment schedule to total/M every period.

    Already-flat schedules return zero angles without iteration; for M=2 a
    single plane rotation by pi/4 averages the two payments exactly, so that
    closed form is returned directly. Larger M goes through
    :func:`solve_design`.
    """
    dim = ops.dim
    q = ops.diagonal("installment")
    trace = float(np.sum(q))
    scale = max(abs(trace), 1.0)
    mean = trace / dim
    g = generator_count(dim)

    if float(np.max(np.abs(q - mean))) <= 1e-12 * scale:
        return DesignSolution(
            angles=np.zeros(g), achieved=q.copy(),
            residual=float(np.max(np.abs(q - mean))), status=SolutionStatus.OPTIMAL,
        )
    if dim == 2:
        angles = np.array([np.pi / 4])
        achieved = rotation_from_angles(2, angles).weights() @ q
        return DesignSolution(
            angles=angles, achieved=achieved,
            residual=float(np.max(np.abs(achieved - mean))), status=SolutionStatus.OPTIMAL,
        )
    return solve_design(DesignProblem(ops=ops, objective=Equalize()), config)


@dataclass(frozen=True)
class RegionGrid:
    """Boolean feasibility grid over (x, y) = (sin phi, sin theta) at fixed z."""

    x: np.ndarray
    y: np.ndarray
    feasible: np.ndarray  # shape (len(y), len(x))
    pattern: str
    z: float
    inflation: float | None

    @property
    def feasible_count(self) -> int:
        return int(np.sum(self.feasible))


def _parse_pattern(pattern) -> str:
    signs = "".join(str(s) for s in pattern)
    if len(signs) != 3 or any(c not in "+-" for c in signs):
        raise InvalidPattern(f"pattern must be three signs from {{+,-}}, got {pattern!r}")
    return signs


def sign_pattern_region(ops: LoanOperators, pattern, z: float,
                        grid_n: int = 200, inflation: float | None = None) -> RegionGrid:
    """Grid scan of where the rotated-minus-original installments match ``pattern``.

    M=3 only. Each grid point (x, y) in [-1, 1]^2 fixes a rotation via the
    angle sines (x, y, z); the installments are optionally scaled by an
    inflation factor per period (q_n -> a^n q_n) before rotating. Inequalities
    are strict, so the all-negative pattern is empty everywhere (the deltas
    sum to zero) and any strict pattern fails where the rotation leaves a
    payment unchanged.
    """
    signs = _parse_pattern(pattern)
    if ops.dim != 3:
        raise DimensionMismatch(f"region scan is defined for M=3, got M={ops.dim}")
    if not -1.0 <= z <= 1.0:
        raise InvalidSpec(f"z must be a sine in [-1, 1], got {z}")
    if grid_n < 2:
        raise InvalidSpec("grid_n must be at least 2")
    q = ops.diagonal("installment")
    if inflation is not None:
        q = q * inflation ** np.arange(1, 4)
    xs = np.linspace(-1.0, 1.0, grid_n)
    ys = np.linspace(-1.0, 1.0, grid_n)
    deltas = _kernels.region_deltas(q, float(z), xs, ys)
    ok = np.ones(deltas.shape[:2], dtype=bool)
    for i, s in enumerate(signs):
        ok &= (deltas[:, :, i] < 0.0) if s == "-" else (deltas[:, :, i] > 0.0)
    return RegionGrid(x=xs, y=ys, feasible=ok, pattern=signs, z=float(z), inflation=inflation)


@dataclass
class CompensationReport:
    """How a rotation moves money between periods: delta_n = q_n - qbar_n."""

    deltas: np.ndarray
    balanced: bool
    reduced_periods: list[int]    # periods paying less after rotation (delta > 0)
    increased_periods: list[int]  # periods paying more (delta < 0)
    absorbers: dict[int, list[int]]  # reduced period -> later periods absorbing it

    def to_json(self) -> dict:
        return {
            "deltas": self.deltas.tolist(),
            "balanced": self.balanced,
            "reduced_periods": self.reduced_periods,
            "increased_periods": self.increased_periods,
            "absorbers": {str(k): v for k, v in self.absorbers.items()},
        }


def compensation_report(ops: LoanOperators, u) -> CompensationReport:
    """Verify that reduced payments are exactly compensated later.

    The deltas sum to zero (trace invariance), so any payment pushed below its
    original value must be absorbed by others; the report lists, for every
    reduced period, the later periods that picked up the difference.
    """
    q = ops.diagonal("installment")
    qbar = rotate_diagonal(u, q)
    deltas = q - qbar
    scale = max(abs(float(np.sum(q))), 1.0)
    tol = 1e-9 * scale
    reduced = [int(n) + 1 for n in np.flatnonzero(deltas > tol)]
    increased = [int(n) + 1 for n in np.flatnonzero(deltas < -tol)]
    return CompensationReport(
        deltas=deltas,
        balanced=abs(float(np.sum(deltas))) <= tol,
        reduced_periods=reduced,
        increased_periods=increased,
        absorbers={n: [m for m in increased if m > n] for n in reduced},
    )
