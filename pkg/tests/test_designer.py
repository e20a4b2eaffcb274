import numpy as np
import pytest

from qloan import (
    FRENCH,
    GERMAN,
    CapPayment,
    DesignProblem,
    Infeasible,
    InvalidPattern,
    LinearConstraint,
    OptimizerConfig,
    SolutionStatus,
    TargetSchedule,
    compensation_report,
    equalize_installments,
    rotation_from_angles,
    sign_pattern_region,
    solve_design,
)
from test_operators import make_ops

FAST = OptimizerConfig(starts=4)


class TestEqualize:
    def test_german_m2_closed_form(self, german_m2_ops):
        sol = equalize_installments(german_m2_ops)
        assert sol.angles == pytest.approx([np.pi / 4])
        assert sol.achieved == pytest.approx([65.0, 65.0], abs=1e-12)
        assert sol.status is SolutionStatus.OPTIMAL

    def test_french_already_flat(self):
        ops = make_ops(100.0, 0.2, 6, FRENCH)
        sol = equalize_installments(ops)
        assert not sol.angles.any()
        assert sol.status is SolutionStatus.OPTIMAL

    def test_german_m3(self, german_m3_ops):
        sol = equalize_installments(german_m3_ops, FAST)
        trace = 140.0
        assert sol.achieved == pytest.approx(np.full(3, trace / 3), abs=1e-8 * trace)
        assert sol.residual < 1e-8 * trace
        assert sol.status is SolutionStatus.OPTIMAL

    @pytest.mark.parametrize("m", [4, 7, 12])
    def test_german_larger_m(self, m):
        ops = make_ops(100.0, 0.2, m, GERMAN)
        sol = equalize_installments(ops, FAST)
        trace = float(np.sum(ops.diagonal("installment")))
        assert sol.residual < 1e-8 * trace


class TestSolveDesign:
    def test_target_recovers_quarter_turn_mean(self, german_m2_ops):
        sol = solve_design(DesignProblem(ops=german_m2_ops,
                                         objective=TargetSchedule((65.0, 65.0))), FAST)
        assert sol.residual < 1e-8 * 130
        assert sol.achieved == pytest.approx([65.0, 65.0], abs=1e-6)

    def test_target_equal_to_original_needs_no_rotation(self, german_m2_ops):
        q = tuple(german_m2_ops.diagonal("installment"))
        sol = solve_design(DesignProblem(ops=german_m2_ops, objective=TargetSchedule(q)), FAST)
        assert not sol.angles.any()
        assert sol.residual == 0.0

    def test_asymmetric_feasible_target(self, german_m2_ops):
        sol = solve_design(DesignProblem(ops=german_m2_ops,
                                         objective=TargetSchedule((60.0, 70.0))), FAST)
        assert sol.achieved == pytest.approx([60.0, 70.0], abs=1e-6)

    def test_out_of_bounds_rejected(self, german_m2_ops):
        with pytest.raises(Infeasible) as err:
            solve_design(DesignProblem(ops=german_m2_ops,
                                       objective=TargetSchedule((75.0, 55.0))), FAST)
        assert err.value.code == "target_out_of_bounds"

    def test_wrong_sum_rejected(self, german_m2_ops):
        with pytest.raises(Infeasible) as err:
            solve_design(DesignProblem(ops=german_m2_ops,
                                       objective=TargetSchedule((64.0, 64.0))), FAST)
        assert err.value.code == "trace_mismatch"

    def test_deterministic_bits(self, german_m3_ops):
        problem = DesignProblem(ops=german_m3_ops,
                                objective=TargetSchedule((50.0, 48.0, 42.0)))
        first = solve_design(problem, FAST)
        second = solve_design(problem, FAST)
        assert np.array_equal(first.angles, second.angles)
        assert np.array_equal(first.achieved, second.achieved)
        assert first.residual == second.residual

    def test_cap_payment(self, german_m3_ops):
        sol = solve_design(DesignProblem(ops=german_m3_ops,
                                         objective=CapPayment(period=1, cap=48.0)), FAST)
        assert sol.achieved[0] <= 48.0 + 1e-6
        assert sol.residual <= 1e-6

    def test_cap_below_minimum_rejected(self, german_m3_ops):
        with pytest.raises(Infeasible) as err:
            solve_design(DesignProblem(ops=german_m3_ops,
                                       objective=CapPayment(period=1, cap=5.0)), FAST)
        assert err.value.code == "target_out_of_bounds"

    def test_plane_restriction_freezes_other_periods(self, german_m3_ops):
        q = german_m3_ops.diagonal("installment")
        target = (0.5 * (q[0] + q[1]), 0.5 * (q[0] + q[1]), q[2])
        sol = solve_design(DesignProblem(ops=german_m3_ops,
                                         objective=TargetSchedule(target),
                                         planes=((1, 2),)), FAST)
        assert sol.achieved[2] == pytest.approx(q[2], rel=1e-12)
        assert sol.residual < 1e-8 * np.sum(q)

    def test_linear_constraint_is_respected(self, german_m3_ops):
        # require first-period relief: qbar_1 <= 48 while tracking the original
        constraint = LinearConstraint(coeffs=(1.0, 0.0, 0.0), bound=48.0)
        sol = solve_design(DesignProblem(ops=german_m3_ops,
                                         objective=TargetSchedule((46.0, 50.0, 44.0)),
                                         constraints=(constraint,)), FAST)
        assert sol.achieved[0] <= 48.0 + 1e-6

    def test_trace_invariance_regardless_of_status(self, german_m3_ops):
        target = (50.0, 48.0, 42.0)
        sol = solve_design(DesignProblem(ops=german_m3_ops,
                                         objective=TargetSchedule(target)),
                           OptimizerConfig(starts=1, max_evaluations=3))
        trace = float(np.sum(german_m3_ops.diagonal("installment")))
        assert np.sum(sol.achieved) == pytest.approx(trace, rel=1e-9)


class TestSignPatternRegion:
    def test_german_indexed_mixed_pattern_nonempty(self, german_m3_ops):
        for z in (0.6, 0.7):
            grid = sign_pattern_region(german_m3_ops, "--+", z, grid_n=60, inflation=1.05)
            assert grid.feasible_count > 0

    def test_all_negative_empty(self, german_m3_ops):
        for z in (0.0, 0.6, 0.7):
            grid = sign_pattern_region(german_m3_ops, "---", z, grid_n=40, inflation=1.05)
            assert grid.feasible_count == 0

    def test_identity_cell_fails_strict_patterns(self, german_m3_ops):
        # odd grid_n puts a node exactly at x = y = 0; with z = 0 that node is
        # the identity rotation and every strict inequality fails there
        grid = sign_pattern_region(german_m3_ops, "--+", 0.0, grid_n=41)
        mid = 20
        assert not grid.feasible[mid, mid]

    def test_french_increasing_installments_exclude_positive_last(self):
        # with growing currency installments q3 is the maximum, and no convex
        # mixture exceeds it: the (-,-,+) region must be empty
        ops = make_ops(100.0, 0.2, 3, FRENCH)
        grid = sign_pattern_region(ops, "--+", 0.6, grid_n=40, inflation=1.05)
        assert grid.feasible_count == 0

    def test_invalid_patterns(self, german_m3_ops):
        with pytest.raises(InvalidPattern):
            sign_pattern_region(german_m3_ops, "-+", 0.5)
        with pytest.raises(InvalidPattern):
            sign_pattern_region(german_m3_ops, "-0+", 0.5)


class TestCompensationReport:
    def test_identity_reports_nothing(self, german_m2_ops):
        report = compensation_report(german_m2_ops, rotation_from_angles(2, [0.0]))
        assert report.balanced
        assert report.reduced_periods == []
        assert report.increased_periods == []

    def test_near_quarter_turn_shifts_first_payment(self, german_m2_ops):
        report = compensation_report(german_m2_ops, rotation_from_angles(2, [1.5]))
        # q1 > q2, so a near-swap reduces the first payment and raises the second
        assert report.reduced_periods == [1]
        assert report.increased_periods == [2]
        assert report.absorbers == {1: [2]}
        assert report.deltas[0] == pytest.approx(-report.deltas[1], abs=1e-12 * 130)

    def test_random_m3_balances(self, german_m3_ops):
        rng = np.random.default_rng(11)
        u = rotation_from_angles(3, rng.uniform(-np.pi, np.pi, 3))
        report = compensation_report(german_m3_ops, u)
        assert abs(np.sum(report.deltas)) <= 1e-9 * 140.0
        assert report.balanced
