"""Stateless HTTP/JSON API.

Every endpoint is a pure function of its request body; there are no sessions,
so a UI driving a progressive restructuring simply resubmits its accumulated
angle state. Responses that contain a rotated schedule always carry the
trace-invariance check, and the computation itself refuses to hand back a
schedule that violates it (that would surface as a 500, not a wrong number).

Error envelope: {"error": {"code": <stable string>, "message": <human text>}}
with 400 for malformed requests, 422 for domain-infeasible ones.
"""

from __future__ import annotations

import os

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import serialize
from .core import LoanSpec, Schedule, solve_recurrence, totals
from .designer import (
    DesignProblem,
    compensation_report,
    equalize_installments,
    Equalize,
    sign_pattern_region,
    solve_design,
)
from .errors import (
    DegenerateNormalization,
    Infeasible,
    NegativeRadicand,
    NonNormalizedDensity,
    NonTerminatingLoan,
    QloanError,
    SingularParametrization,
)
from .indexed import debt_peak, indexed_schedule
from .operators import build_operators, check_algebra
from .rotation import rotate_diagonal, rotated_schedule

DEFAULT_BIND = "127.0.0.1:8000"

_DOMAIN_REJECTED = (
    Infeasible,
    NonTerminatingLoan,
    DegenerateNormalization,
    SingularParametrization,
    NegativeRadicand,
    NonNormalizedDensity,
)


def _envelope(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _invariants(schedule: Schedule) -> dict:
    paid, amortized = totals(schedule)
    return {
        "trace_q": paid,
        "sum_amortization": amortized,
        "d_final": float(schedule.d[-1]),
    }


def _loan_from(payload: dict) -> LoanSpec:
    return serialize.loan_spec_from_json(serialize.require_key(payload, "loan", dict, "request"))


def create_app(dev_cors: bool = False) -> FastAPI:
    app = FastAPI(title="qloan", docs_url=None, redoc_url=None)

    if dev_cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
        )

    @app.exception_handler(QloanError)
    async def _domain_error(_req: Request, exc: QloanError):
        status = 422 if isinstance(exc, _DOMAIN_REJECTED) else 400
        return JSONResponse(status_code=status, content=_envelope(exc.code, str(exc)))

    @app.exception_handler(RequestValidationError)
    async def _malformed(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content=_envelope("malformed_request", str(exc)))

    @app.exception_handler(Exception)
    async def _internal(_req: Request, exc: Exception):
        return JSONResponse(status_code=500, content=_envelope("internal_error", str(exc)))

    @app.get("/api/health")
    async def health():
        return {"status": "ok"}

    @app.post("/api/schedule")
    async def schedule(payload: dict):
        spec = _loan_from(payload)
        if payload.get("index") is not None:
            model = serialize.index_model_from_json(payload["index"])
            result = indexed_schedule(spec, model)
            peak = debt_peak(result.currency)
            return {
                "schedule": serialize.schedule_to_json(result.index_units),
                "currency": serialize.schedule_to_json(result.currency),
                "u": result.u.tolist(),
                "debt_peak": None if peak is None else {"n": peak[0], "value": peak[1]},
                "invariants": _invariants(result.index_units),
            }
        sched = solve_recurrence(spec)
        return {
            "schedule": serialize.schedule_to_json(sched),
            "invariants": _invariants(sched),
        }

    @app.post("/api/rotate")
    async def rotate(payload: dict):
        spec = _loan_from(payload)
        rot = serialize.rotation_from_json(serialize.require_key(payload, "rotation", dict, "request"))
        sched = solve_recurrence(spec)
        ops = build_operators(sched, spec.rate)

        if payload.get("index") is not None:
            model = serialize.index_model_from_json(payload["index"])
            result = indexed_schedule(spec, model)
            cur = result.currency
            original = {"q": cur.q.tolist(), "a": cur.a.tolist(),
                        "y": cur.y.tolist(), "d": cur.d[1:].tolist()}
            qbar = rotate_diagonal(rot, cur.q)
            rotated = {
                "qbar": qbar.tolist(),
                "abar": rotate_diagonal(rot, cur.a).tolist(),
                "ybar": rotate_diagonal(rot, cur.y).tolist(),
                "dbar": rotate_diagonal(rot, cur.d[1:]).tolist(),
            }
            trace_q = float(np.sum(cur.q))
            peak = debt_peak(cur)
            deltas = (cur.q - qbar).tolist()
        else:
            rotsched = rotated_schedule(rot, ops)
            original = {"q": sched.q.tolist(), "a": sched.a.tolist(),
                        "y": sched.y.tolist(), "d": sched.d[1:].tolist()}
            rotated = {
                "qbar": rotsched.qbar.tolist(),
                "abar": rotsched.abar.tolist(),
                "ybar": rotsched.ybar.tolist(),
                "dbar": rotsched.dbar.tolist(),
                "risk": rotsched.risk.tolist(),
            }
            trace_q = sched.total_paid
            peak = None
            deltas = compensation_report(ops, rot).deltas.tolist()

        trace_rot = float(np.sum(rotated["qbar"]))
        preserved = abs(trace_rot - trace_q) <= 1e-9 * max(abs(trace_q), 1.0)
        if not preserved:
            raise RuntimeError("rotation failed the trace-invariance check")
        return {
            "original": original,
            "rotated": rotated,
            "deltas": deltas,
            "debt_peak": None if peak is None else {"n": peak[0], "value": peak[1]},
            "invariants": {
                "trace_q": trace_q,
                "trace_q_rotated": trace_rot,
                "trace_q_preserved": preserved,
                "sum_amortization": sched.total_amortized,
                "d_final": float(sched.d[-1]),
            },
        }

    @app.post("/api/design")
    async def design(payload: dict):
        spec = _loan_from(payload)
        objective = serialize.objective_from_json(
            serialize.require_key(payload, "objective", dict, "request"))
        constraints = serialize.constraints_from_json(payload.get("constraints"))
        planes = serialize.planes_from_json(payload.get("planes"))
        config = serialize.optimizer_config_from_json(payload.get("config"))
        ops = build_operators(solve_recurrence(spec), spec.rate)
        if isinstance(objective, Equalize) and not constraints and planes is None:
            solution = equalize_installments(ops, config)
        else:
            solution = solve_design(
                DesignProblem(ops=ops, objective=objective, constraints=constraints,
                              planes=planes), config)
        return serialize.design_solution_to_json(solution)

    @app.post("/api/region")
    async def region(payload: dict):
        spec = _loan_from(payload)
        pattern = serialize.require_key(payload, "pattern", object, "request")
        z = serialize.require_key(payload, "z", float, "request")
        grid_n = payload.get("grid_n", 200)
        inflation = payload.get("a")
        ops = build_operators(solve_recurrence(spec), spec.rate)
        grid = sign_pattern_region(ops, pattern, z, grid_n=grid_n, inflation=inflation)
        return {
            "x": grid.x.tolist(),
            "y": grid.y.tolist(),
            "feasible": grid.feasible.astype(int).tolist(),
            "feasible_count": grid.feasible_count,
            "pattern": grid.pattern,
            "z": grid.z,
        }

    @app.post("/api/verify-algebra")
    async def verify_algebra(payload: dict):
        spec = _loan_from(payload)
        ops = build_operators(solve_recurrence(spec), spec.rate)
        report = check_algebra(ops)
        return {"report": report.to_json(), "passed": report.passed, "tol": report.tol}

    return app


def bind_address() -> tuple[str, int]:
    """Host/port from QLOAN_BIND (host:port), defaulting to 127.0.0.1:8000."""
    raw = os.environ.get("QLOAN_BIND", DEFAULT_BIND)
    host, _, port = raw.rpartition(":")
    if not host or not port.isdigit():
        raise QloanError(f"QLOAN_BIND must look like host:port, got {raw!r}", code="invalid_bind")
    return host, int(port)


def serve(bind: str | None = None, dev_cors: bool = False) -> None:
    import uvicorn

    if bind is not None:
        os.environ["QLOAN_BIND"] = bind
    host, port = bind_address()
    uvicorn.run(create_app(dev_cors=dev_cors), host=host, port=port)
