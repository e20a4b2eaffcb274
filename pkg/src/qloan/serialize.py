"""JSON and CSV adapters for the public file formats.

Loan specs travel as::

    {"d0": 100, "M": 10, "rate": {"constant": 0.2} | {"per_period": [...]},
     "system": "french" | "german" | {"fixed_installments": [...]}
                                   | {"fixed_amortizations": [...]}}

index models as ``{"power_law": {"u0", "alpha"}} | {"linear": {"u0", "slope"}}
| {"explicit": [...]} | {"geometric": {"a", "u1"}}``, rotations as
``{"dim": M, "angles": [...]}``. Schedules are emitted as CSV with header
``n,d,a,y,q`` (the n=0 row carries d_0 and blank payment columns); region
grids as ``x,y,feasible`` with 0/1 flags. All CSV floats are printed with 12
significant digits so identical inputs give byte-identical files.
"""

from __future__ import annotations

import io
import json

import numpy as np

from .core import (
    FixedAmortizations,
    FixedInstallments,
    LoanSpec,
    RateModel,
    Schedule,
)
from .designer import (
    CapPayment,
    DesignSolution,
    Equalize,
    LinearConstraint,
    Objective,
    OptimizerConfig,
    RegionGrid,
    TargetSchedule,
)
from .errors import InvalidModel, InvalidSpec
from .indexed import (
    ExplicitIndex,
    GeometricIndex,
    IndexModel,
    LinearIndex,
    PowerLawIndex,
)
from .rotation import RotationSpec, rotation_from_angles


def fmt(x: float) -> str:
    """12-significant-digit float formatting; negative zero normalized."""
    return f"{float(x) + 0.0:.12g}"


def require_key(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InvalidSpec(f"{where}: missing key {key!r}")
    value = obj[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidSpec(f"{where}: {key!r} must be a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise InvalidSpec(f"{where}: {key!r} must be an integer, got {value!r}")
        return value
    return value


def _number_list(value, where: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise InvalidSpec(f"{where}: expected a nonempty array, got {value!r}")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InvalidSpec(f"{where}: array entries must be numbers, got {v!r}")
        out.append(float(v))
    return out


def loan_spec_from_json(obj: dict) -> LoanSpec:
    d0 = require_key(obj, "d0", float, "loan spec")
    m = require_key(obj, "M", int, "loan spec")
    rate_obj = require_key(obj, "rate", dict, "loan spec")
    if not isinstance(rate_obj, dict):
        raise InvalidSpec(f"loan spec: rate must be an object, got {rate_obj!r}")
    if set(rate_obj) == {"constant"}:
        rate = RateModel(constant=require_key(rate_obj, "constant", float, "rate"))
    elif set(rate_obj) == {"per_period"}:
        rate = RateModel(per_period=tuple(_number_list(rate_obj["per_period"], "rate")))
    else:
        raise InvalidSpec(f"rate must be {{'constant': t}} or {{'per_period': [...]}}, got {rate_obj!r}")

    system_obj = require_key(obj, "system", object, "loan spec")
    if isinstance(system_obj, str):
        system = system_obj
    elif isinstance(system_obj, dict) and set(system_obj) == {"fixed_installments"}:
        system = FixedInstallments(tuple(_number_list(system_obj["fixed_installments"], "system")))
    elif isinstance(system_obj, dict) and set(system_obj) == {"fixed_amortizations"}:
        system = FixedAmortizations(tuple(_number_list(system_obj["fixed_amortizations"], "system")))
    else:
        raise InvalidSpec(f"unknown system {system_obj!r}")
    return LoanSpec(d0=d0, M=m, rate=rate, system=system)


def loan_spec_to_json(spec: LoanSpec) -> dict:
    rate = ({"constant": spec.rate.constant} if spec.rate.is_constant
            else {"per_period": list(spec.rate.per_period)})
    if isinstance(spec.system, FixedInstallments):
        system = {"fixed_installments": list(spec.system.values)}
    elif isinstance(spec.system, FixedAmortizations):
        system = {"fixed_amortizations": list(spec.system.values)}
    else:
        system = spec.system
    return {"d0": spec.d0, "M": spec.M, "rate": rate, "system": system}


def index_model_from_json(obj: dict) -> IndexModel:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InvalidModel(f"index model must be a single-key object, got {obj!r}")
    (key, value), = obj.items()
    if key == "power_law":
        return PowerLawIndex(u0=require_key(value, "u0", float, "power_law"),
                             alpha=require_key(value, "alpha", float, "power_law"))
    if key == "linear":
        return LinearIndex(u0=require_key(value, "u0", float, "linear"),
                           slope=require_key(value, "slope", float, "linear"))
    if key == "explicit":
        return ExplicitIndex(tuple(_number_list(value, "explicit")))
    if key == "geometric":
        return GeometricIndex(a=require_key(value, "a", float, "geometric"),
                              u1=require_key(value, "u1", float, "geometric"))
    raise InvalidModel(f"unknown index model kind {key!r}")


def index_model_to_json(model: IndexModel) -> dict:
    if isinstance(model, PowerLawIndex):
        return {"power_law": {"u0": model.u0, "alpha": model.alpha}}
    if isinstance(model, LinearIndex):
        return {"linear": {"u0": model.u0, "slope": model.slope}}
    if isinstance(model, ExplicitIndex):
        return {"explicit": list(model.values)}
    return {"geometric": {"a": model.a, "u1": model.u1}}


def rotation_from_json(obj: dict) -> RotationSpec:
    dim = require_key(obj, "dim", int, "rotation")
    angles_raw = require_key(obj, "angles", object, "rotation")
    if not isinstance(angles_raw, (list, tuple)):
        raise InvalidSpec(f"rotation: angles must be an array, got {angles_raw!r}")
    angles = _number_list(angles_raw, "rotation") if angles_raw else []
    return rotation_from_angles(dim, np.asarray(angles, dtype=float))


def rotation_to_json(spec: RotationSpec) -> dict:
    return {"dim": spec.dim, "angles": spec.angles.tolist()}


def schedule_to_json(schedule: Schedule) -> dict:
    return {
        "d": schedule.d.tolist(),
        "a": schedule.a.tolist(),
        "y": schedule.y.tolist(),
        "q": schedule.q.tolist(),
        "total_paid": schedule.total_paid,
        "total_amortized": schedule.total_amortized,
    }


def schedule_to_csv(schedule: Schedule) -> str:
    out = io.StringIO()
    out.write("n,d,a,y,q\n")
    out.write(f"0,{fmt(schedule.d[0])},,,\n")
    for n in range(1, schedule.periods + 1):
        out.write(f"{n},{fmt(schedule.d[n])},{fmt(schedule.a[n - 1])},"
                  f"{fmt(schedule.y[n - 1])},{fmt(schedule.q[n - 1])}\n")
    return out.getvalue()


def region_to_csv(region: RegionGrid) -> str:
    out = io.StringIO()
    out.write("x,y,feasible\n")
    for iy, yv in enumerate(region.y):
        for ix, xv in enumerate(region.x):
            out.write(f"{fmt(xv)},{fmt(yv)},{int(region.feasible[iy, ix])}\n")
    return out.getvalue()


def observations_from_csv(text: str) -> list[tuple[float, float]]:
    """Parse ``n,u`` observation rows; a header line is skipped if present."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise InvalidModel(f"line {lineno}: expected 'n,u', got {line!r}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if lineno == 1:  # header
                continue
            raise InvalidModel(f"line {lineno}: non-numeric observation {line!r}")
    return rows


def objective_from_json(obj: dict) -> Objective:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise InvalidSpec(f"objective must be a single-key object, got {obj!r}")
    (key, value), = obj.items()
    if key == "equalize":
        return Equalize()
    if key == "target":
        return TargetSchedule(tuple(_number_list(value, "target")))
    if key == "cap":
        return CapPayment(period=require_key(value, "period", int, "cap"),
                          cap=require_key(value, "value", float, "cap"))
    raise InvalidSpec(f"unknown objective kind {key!r}")


def constraints_from_json(value) -> tuple[LinearConstraint, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise InvalidSpec(f"constraints must be an array, got {value!r}")
    out = []
    for item in value:
        coeffs = tuple(_number_list(require_key(item, "coeffs", object, "constraint"), "constraint"))
        out.append(LinearConstraint(coeffs=coeffs, bound=require_key(item, "bound", float, "constraint")))
    return tuple(out)


def planes_from_json(value) -> tuple[tuple[int, int], ...] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        raise InvalidSpec(f"planes must be a nonempty array of [i, j] pairs, got {value!r}")
    out = []
    for item in value:
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or any(isinstance(v, bool) or not isinstance(v, int) for v in item)):
            raise InvalidSpec(f"plane entries must be [i, j] integer pairs, got {item!r}")
        out.append((item[0], item[1]))
    return tuple(out)


def optimizer_config_from_json(value) -> OptimizerConfig:
    if value is None:
        return OptimizerConfig()
    if not isinstance(value, dict):
        raise InvalidSpec(f"config must be an object, got {value!r}")
    allowed = {"starts", "base_seed", "fd_step", "max_evaluations", "penalty_weight",
               "optimal_tol_rel", "early_stop_rel"}
    unknown = set(value) - allowed
    if unknown:
        raise InvalidSpec(f"unknown config keys {sorted(unknown)}")
    return OptimizerConfig(**value)


def design_solution_to_json(solution: DesignSolution) -> dict:
    return {
        "angles": solution.angles.tolist(),
        "achieved": solution.achieved.tolist(),
        "residual": solution.residual,
        "status": solution.status.value,
    }


def dumps(obj) -> str:
    """Stable JSON for CLI output."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
