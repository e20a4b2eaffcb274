"""Command-line interface.

Subcommands: schedule, rotate, design, region, verify-algebra, fit-index,
serve. Loans are described either with flags (--d0/--M/--t/--system ...) or a
JSON file via --spec-json; output goes to stdout or --out. Exit codes: 0 on
success, 1 on a domain error (the error envelope is printed to stderr),
2 on usage errors.

The --figure flags reproduce the standard data sets: ``schedule --figure
nicl`` emits all four series for both systems at d0=100, M=10, t=0.2;
``rotate --figure a1`` sweeps the two M=2 indexed installment ratios against
x = sin(angle) at inflation 1.1; ``region --figure`` emits the feasibility
grids at inflation 1.05 for z = 0.6 and 0.7.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .core import (
    FRENCH,
    GERMAN,
    FixedAmortizations,
    FixedInstallments,
    LoanSpec,
    RateModel,
    solve_recurrence,
)
from .designer import (
    CapPayment,
    DesignProblem,
    Equalize,
    TargetSchedule,
    equalize_installments,
    sign_pattern_region,
    solve_design,
)
from .errors import InvalidSpec, QloanError
from .indexed import GeometricIndex, fit_index, indexed_schedule, debt_peak
from .operators import build_operators, check_algebra
from .rotation import rotate_diagonal, rotated_schedule, rotation_from_angles
from .serialize import fmt


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise InvalidSpec(f"expected comma-separated numbers, got {text!r}")


def _loan_from_args(args) -> LoanSpec:
    if args.spec_json:
        return serialize.loan_spec_from_json(json.loads(Path(args.spec_json).read_text()))
    if args.d0 is None or args.M is None:
        raise InvalidSpec("either --spec-json or --d0/--M must be given")
    if args.rates is not None:
        rate = RateModel(per_period=tuple(_floats(args.rates)))
    else:
        rate = RateModel(constant=args.t)
    if args.installments is not None:
        system = FixedInstallments(tuple(_floats(args.installments)))
    elif args.amortizations is not None:
        system = FixedAmortizations(tuple(_floats(args.amortizations)))
    else:
        system = args.system
    return LoanSpec(d0=args.d0, M=args.M, rate=rate, system=system)


def _index_from_args(args):
    if getattr(args, "index_json", None):
        return serialize.index_model_from_json(json.loads(Path(args.index_json).read_text()))
    if getattr(args, "geometric_a", None) is not None:
        # u_n = a^n, the standard constant-inflation convention
        return GeometricIndex(a=args.geometric_a, u1=args.geometric_a)
    return None


def _add_loan_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec-json", help="loan spec JSON file (overrides other loan flags)")
    parser.add_argument("--d0", type=float, help="initial debt")
    parser.add_argument("--M", type=int, help="number of periods")
    parser.add_argument("--t", type=float, default=0.0, help="constant interest rate per period")
    parser.add_argument("--rates", help="comma-separated per-period rates (overrides --t)")
    parser.add_argument("--system", choices=[FRENCH, GERMAN], default=FRENCH)
    parser.add_argument("--installments", help="comma-separated fixed installment sequence")
    parser.add_argument("--amortizations", help="comma-separated fixed amortization sequence")


def _add_index_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--index-json", help="index model JSON file")
    parser.add_argument("--geometric-a", type=float,
                        help="geometric index shorthand: unit value a^n at period n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _indexed_csv(result) -> str:
    lines = ["n,u,d,a,y,q,d_currency,a_currency,y_currency,q_currency"]
    iu, cur, u = result.index_units, result.currency, result.u
    lines.append(f"0,{fmt(u[0])},{fmt(iu.d[0])},,,,{fmt(cur.d[0])},,,")
    for n in range(1, iu.periods + 1):
        lines.append(
            f"{n},{fmt(u[n])},{fmt(iu.d[n])},{fmt(iu.a[n-1])},{fmt(iu.y[n-1])},{fmt(iu.q[n-1])},"
            f"{fmt(cur.d[n])},{fmt(cur.a[n-1])},{fmt(cur.y[n-1])},{fmt(cur.q[n-1])}"
        )
    return "\n".join(lines) + "\n"


def cmd_schedule(args) -> int:
    if args.figure == "nicl":
        lines = ["system,n,d,a,y,q"]
        for system in (FRENCH, GERMAN):
            spec = LoanSpec(d0=100.0, M=10, rate=RateModel(constant=0.2), system=system)
            sched = solve_recurrence(spec)
            lines.append(f"{system},0,{fmt(sched.d[0])},,,")
            for n in range(1, 11):
                lines.append(f"{system},{n},{fmt(sched.d[n])},{fmt(sched.a[n-1])},"
                             f"{fmt(sched.y[n-1])},{fmt(sched.q[n-1])}")
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    spec = _loan_from_args(args)
    model = _index_from_args(args)
    if model is not None:
        _emit(_indexed_csv(indexed_schedule(spec, model)), args.out)
    else:
        _emit(serialize.schedule_to_csv(solve_recurrence(spec)), args.out)
    return 0


def cmd_rotate(args) -> int:
    if args.figure == "a1":
        # indexed M=2 installment ratios vs x = sin(angle) at inflation 1.1
        a = 1.1
        u = np.array([a, a * a])
        xs = np.linspace(-1.0, 1.0, 201)
        lines = ["x,q1_ratio,q2_ratio"]
        for x in xs:
            rot = rotation_from_angles(2, [float(np.arcsin(x))])
            ratios = rotate_diagonal(rot, u) / u[0]
            lines.append(f"{fmt(x)},{fmt(ratios[0])},{fmt(ratios[1])}")
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    spec = _loan_from_args(args)
    if args.angles is None:
        raise InvalidSpec("--angles is required")
    rot = rotation_from_angles(spec.M, _floats(args.angles))
    sched = solve_recurrence(spec)
    model = _index_from_args(args)
    if model is not None:
        result = indexed_schedule(spec, model)
        qbar = rotate_diagonal(rot, result.currency.q)
        peak = debt_peak(result.currency)
        payload = {
            "angles": rot.angles.tolist(),
            "currency_q": result.currency.q.tolist(),
            "qbar": qbar.tolist(),
            "debt_peak": None if peak is None else {"n": peak[0], "value": peak[1]},
            "invariants": {
                "trace_q": float(np.sum(result.currency.q)),
                "trace_q_rotated": float(np.sum(qbar)),
            },
        }
    else:
        ops = build_operators(sched, spec.rate)
        rs = rotated_schedule(rot, ops)
        payload = {
            "angles": rot.angles.tolist(),
            "original": serialize.schedule_to_json(sched),
            "rotated": {"qbar": rs.qbar.tolist(), "abar": rs.abar.tolist(),
                        "ybar": rs.ybar.tolist(), "dbar": rs.dbar.tolist(),
                        "risk": rs.risk.tolist()},
            "invariants": {
                "trace_q": sched.total_paid,
                "trace_q_rotated": float(np.sum(rs.qbar)),
                "sum_amortization_rotated": float(np.sum(rs.abar)),
            },
        }
    _emit(serialize.dumps(payload), args.out)
    return 0


def cmd_design(args) -> int:
    if args.problem_json:
        payload = json.loads(Path(args.problem_json).read_text())
        spec = serialize.loan_spec_from_json(serialize.require_key(payload, "loan", dict, "problem"))
        objective = serialize.objective_from_json(
            serialize.require_key(payload, "objective", dict, "problem"))
        constraints = serialize.constraints_from_json(payload.get("constraints"))
        planes = serialize.planes_from_json(payload.get("planes"))
        config = serialize.optimizer_config_from_json(payload.get("config"))
    else:
        spec = _loan_from_args(args)
        constraints = ()
        planes = None
        config = serialize.optimizer_config_from_json(None)
        if args.equalize:
            objective = Equalize()
        elif args.target is not None:
            objective = TargetSchedule(tuple(_floats(args.target)))
        elif args.cap_period is not None and args.cap_value is not None:
            objective = CapPayment(period=args.cap_period, cap=args.cap_value)
        else:
            raise InvalidSpec("choose --equalize, --target or --cap-period/--cap-value")
    ops = build_operators(solve_recurrence(spec), spec.rate)
    if isinstance(objective, Equalize) and not constraints and planes is None:
        solution = equalize_installments(ops, config)
    else:
        solution = solve_design(DesignProblem(ops=ops, objective=objective,
                                              constraints=constraints, planes=planes), config)
    _emit(serialize.dumps(serialize.design_solution_to_json(solution)), args.out)
    return 0


def cmd_region(args) -> int:
    if args.figure:
        spec = LoanSpec(d0=100.0, M=3, rate=RateModel(constant=0.2), system=GERMAN)
        ops = build_operators(solve_recurrence(spec), spec.rate)
        for z in (0.6, 0.7):
            grid = sign_pattern_region(ops, "--+", z, grid_n=args.grid_n, inflation=1.05)
            text = serialize.region_to_csv(grid)
            if args.out:
                _emit(text, f"{args.out}_z{z}.csv")
            else:
                sys.stdout.write(f"# z={z}\n" + text)
        return 0
    spec = _loan_from_args(args)
    ops = build_operators(solve_recurrence(spec), spec.rate)
    grid = sign_pattern_region(ops, args.pattern, args.z, grid_n=args.grid_n,
                               inflation=args.a)
    _emit(serialize.region_to_csv(grid), args.out)
    return 0


def cmd_verify_algebra(args) -> int:
    spec = _loan_from_args(args)
    ops = build_operators(solve_recurrence(spec), spec.rate)
    report = check_algebra(ops)
    _emit(serialize.dumps({"report": report.to_json(), "passed": report.passed,
                           "tol": report.tol}), args.out)
    return 0


def cmd_fit_index(args) -> int:
    text = Path(args.observations).read_text()
    fit = fit_index(serialize.observations_from_csv(text))
    _emit(serialize.dumps(fit.to_json()), args.out)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(bind=args.bind, dev_cors=args.dev_cors)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qloan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="solve a loan schedule, emit CSV")
    _add_loan_flags(p)
    _add_index_flags(p)
    p.add_argument("--figure", choices=["nicl"], help="emit the standard two-system data set")
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("rotate", help="apply a rotation, emit JSON")
    _add_loan_flags(p)
    _add_index_flags(p)
    p.add_argument("--angles", help="comma-separated angle vector (radians)")
    p.add_argument("--figure", choices=["a1"], help="emit the M=2 indexed ratio sweep")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rotate)

    p = sub.add_parser("design", help="search angles for a target schedule, emit JSON")
    _add_loan_flags(p)
    p.add_argument("--problem-json", help="full design problem JSON file")
    p.add_argument("--equalize", action="store_true")
    p.add_argument("--target", help="comma-separated target installments")
    p.add_argument("--cap-period", type=int)
    p.add_argument("--cap-value", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("region", help="M=3 sign-pattern feasibility grid, emit CSV")
    _add_loan_flags(p)
    p.add_argument("--pattern", default="--+", help="three signs, e.g. --+ ")
    p.add_argument("--z", type=float, default=0.6, help="fixed sin(gamma)")
    p.add_argument("--a", type=float, help="inflation factor applied as a^n")
    p.add_argument("--grid-n", type=int, default=200)
    p.add_argument("--figure", action="store_true",
                   help="emit the standard grids at a=1.05, z in {0.6, 0.7}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify-algebra", help="check all operator relations, emit JSON")
    _add_loan_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("fit-index", help="fit power-law and linear index models")
    p.add_argument("--observations", required=True, help="CSV file with n,u rows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_index)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--bind", help="host:port (default: QLOAN_BIND or 127.0.0.1:8000)")
    p.add_argument("--dev-cors", action="store_true",
                   help="permissive cross-origin headers for UI development")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QloanError as exc:
        sys.stderr.write(serialize.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
