"""Inflation-indexed loans.

The contract is written in an index unit worth u_n currency at period n (the
UVA-style construction): the index-unit schedule is an ordinary loan, and
every currency amount is the index amount times u_n. The currency debt then
follows its own recurrence with the effective rate
t_{n-1} = (1+t) u_n / u_{n-1} - 1, and for a growing index it can rise before
it falls; :func:`debt_peak` locates that hump. Rotations apply to the
currency installments exactly as to any diagonal operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import FRENCH, GERMAN, LoanSpec, Schedule, solve_recurrence
from .errors import (
    DimensionMismatch,
    InsufficientData,
    InvalidModel,
    InvalidSpec,
    NonNormalizedDensity,
)
from .rotation import RotationSpec, rotate_diagonal, rotation_from_angles


@dataclass(frozen=True)
class PowerLawIndex:
    """u_n = u0 * exp(alpha * n)."""

    u0: float
    alpha: float

    def __post_init__(self):
        if not self.u0 > 0:
            raise InvalidModel(f"u0 must be positive, got {self.u0}")


@dataclass(frozen=True)
class LinearIndex:
    """u_n = u0 + slope * n."""

    u0: float
    slope: float

    def __post_init__(self):
        if not self.u0 > 0:
            raise InvalidModel(f"u0 must be positive, got {self.u0}")


@dataclass(frozen=True)
class ExplicitIndex:
    """Observed unit values u_1..u_M; u_0 defaults to u_1 (no revaluation before
    the first period)."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values or any(not v > 0 for v in self.values):
            raise InvalidModel("explicit index values must be positive")


@dataclass(frozen=True)
class GeometricIndex:
    """u_n = u1 * a^(n-1): constant per-period inflation factor a.

    The currency value of the initial debt uses u_0 = u_1 / a, so the series
    with u1 = a is exactly u_n = a^n including n = 0.
    """

    a: float
    u1: float

    def __post_init__(self):
        if not (self.a > 0 and self.u1 > 0):
            raise InvalidModel(f"geometric index needs a > 0 and u1 > 0, got {self}")


IndexModel = Union[PowerLawIndex, LinearIndex, ExplicitIndex, GeometricIndex]


def unit_value(model: IndexModel, n: int) -> float:
    """Currency value of one index unit at period n >= 0."""
    if n < 0:
        raise InvalidModel(f"period must be nonnegative, got {n}")
    if isinstance(model, PowerLawIndex):
        value = model.u0 * np.exp(model.alpha * n)
    elif isinstance(model, LinearIndex):
        value = model.u0 + model.slope * n
    elif isinstance(model, GeometricIndex):
        value = model.u1 / model.a if n == 0 else model.u1 * model.a ** (n - 1)
    elif isinstance(model, ExplicitIndex):
        if n > len(model.values):
            raise InvalidModel(f"explicit index has {len(model.values)} values, asked for n={n}")
        value = model.values[0] if n == 0 else model.values[n - 1]
    else:
        raise InvalidModel(f"unknown index model {model!r}")
    if not value > 0:
        raise InvalidModel(f"index value at n={n} is not positive: {value!r}")
    return float(value)


def index_series(model: IndexModel, periods: int) -> np.ndarray:
    """u_1..u_M as an array; every value must be positive."""
    if periods < 1:
        raise InvalidModel("periods must be >= 1")
    return np.array([unit_value(model, n) for n in range(1, periods + 1)])


def effective_rates(u: np.ndarray, t: float) -> np.ndarray:
    """Currency-denominated rates of an indexed loan: t_{n-1} = (1+t) u_n/u_{n-1} - 1.

    ``u`` must include the initial value, i.e. u_0..u_M; the result has length
    len(u) - 1 and reduces to the plain rate t wherever the index is flat.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or len(u) < 2:
        raise InvalidModel("need at least u_0 and u_1")
    if np.min(u) <= 0:
        raise InvalidModel("index values must be positive")
    return (1.0 + t) * u[1:] / u[:-1] - 1.0


@dataclass(frozen=True)
class IndexedSchedule:
    """Index-unit schedule plus its currency image under u_n scaling."""

    index_units: Schedule
    currency: Schedule
    u: np.ndarray  # u_0..u_M


def indexed_schedule(spec: LoanSpec, model: IndexModel) -> IndexedSchedule:
    """Solve the loan in index units and convert period by period to currency.

    The index-unit schedule is exactly the non-indexed solution of ``spec``;
    currency values are d_n u_n, a_n u_n, y_n u_n, q_n u_n. The currency
    sequences satisfy the effective-rate recurrence but are not themselves a
    terminated loan (their amortizations sum to more than d_0 u_0 when the
    index grows), so they are returned as raw series, not revalidated.
    """
    if spec.system not in (FRENCH, GERMAN):
        raise InvalidSpec("indexed loans are defined for the french or german systems")
    index_units = solve_recurrence(spec)
    u_full = np.array([unit_value(model, n) for n in range(spec.M + 1)])
    currency = Schedule(
        d=index_units.d * u_full,
        a=index_units.a * u_full[1:],
        y=index_units.y * u_full[1:],
        q=index_units.q * u_full[1:],
    )
    return IndexedSchedule(index_units=index_units, currency=currency, u=u_full)


def debt_peak(currency_schedule: Schedule) -> tuple[int, float] | None:
    """Interior maximum of the currency debt, or None when it only decreases.

    Discrete argmax over n = 0..M with ties broken toward the smallest n;
    a peak at n = 0 means the debt never rose above its initial value.
    """
    d = currency_schedule.d
    n_star = int(np.argmax(d))
    if n_star == 0:
        return None
    return n_star, float(d[n_star])


def rotated_indexed_installments(u: np.ndarray, q, rotation: RotationSpec | np.ndarray) -> np.ndarray:
    """Rotate the currency installments u_n * q_n.

    ``q`` may be the constant index-unit installment or a per-period array.
    For M=2 with u_2 = a u_1 and a quarter-turn plane angle the two currency
    payments both land on (1+a)/2 * u_1 q: the indexed loan becomes a
    constant-installment loan in currency terms.
    """
    u = np.asarray(u, dtype=float)
    currency = u * np.asarray(q, dtype=float)
    if currency.shape != u.shape:
        raise DimensionMismatch("installment array does not broadcast against the index series")
    return rotate_diagonal(rotation, currency)


@dataclass(frozen=True)
class InflationDensity:
    """Probability density for the unknown future index values.

    ``pdf`` maps an array of shape (..., dims) of future unit values to
    densities; the support is [0, u_max] per coordinate. The density must
    integrate to 1 within 1e-6 on a midpoint grid at the stored resolution.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    u_max: float
    dims: int
    resolution: int = 128

    def __post_init__(self):
        if not self.u_max > 0:
            raise NonNormalizedDensity(f"u_max must be positive, got {self.u_max}")
        if self.dims < 1:
            raise NonNormalizedDensity("density needs at least one coordinate")
        mass = self._mass(self.resolution)
        if abs(mass - 1.0) > 1e-6:
            raise NonNormalizedDensity(f"density integrates to {mass!r}, not 1")

    def grid(self, resolution: int) -> np.ndarray:
        """Midpoint-rule nodes, shape (resolution**dims, dims)."""
        h = self.u_max / resolution
        axis = (np.arange(resolution) + 0.5) * h
        mesh = np.meshgrid(*([axis] * self.dims), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def _mass(self, resolution: int) -> float:
        cell = (self.u_max / resolution) ** self.dims
        return float(np.sum(self.pdf(self.grid(resolution))) * cell)

    @classmethod
    def uniform(cls, u_max: float, dims: int, resolution: int = 128) -> "InflationDensity":
        density = 1.0 / u_max ** dims

        def pdf(points: np.ndarray) -> np.ndarray:
            return np.full(points.shape[:-1], density)

        return cls(pdf=pdf, u_max=u_max, dims=dims, resolution=resolution)


def expected_rotated_installments(density: InflationDensity, u1: float, q: float,
                                  angles) -> tuple[np.ndarray, np.ndarray]:
    """Expectation of the rotated currency installments over inflation uncertainty.

    The loan has M = density.dims + 1 periods: u_1 is known, u_2..u_M are
    integrated against the density on a tensor midpoint grid with one
    Richardson refinement. Returns (values, error_estimates), both length M.
    """
    dim = density.dims + 1
    spread = rotation_from_angles(dim, angles).weights()

    def integrate(resolution: int) -> np.ndarray:
        pts = density.grid(resolution)  # (n_pts, dims)
        weights = density.pdf(pts) * (density.u_max / resolution) ** density.dims
        u_vec = np.concatenate(
            [np.full((pts.shape[0], 1), float(u1)), pts], axis=1
        )  # (n_pts, M)
        qbar = (u_vec * float(q)) @ spread.T  # (n_pts, M)
        return weights @ qbar

    coarse = integrate(density.resolution)
    fine = integrate(2 * density.resolution)
    correction = (fine - coarse) / 3.0  # midpoint rule is order 2
    return fine + correction, np.abs(correction)


@dataclass(frozen=True)
class IndexFit:
    """Least-squares fits of both standard index shapes; the caller picks."""

    power_law: PowerLawIndex
    power_law_sse: float
    linear: LinearIndex
    linear_sse: float

    def to_json(self) -> dict:
        return {
            "power_law": {"u0": self.power_law.u0, "alpha": self.power_law.alpha,
                          "sse": self.power_law_sse},
            "linear": {"u0": self.linear.u0, "slope": self.linear.slope,
                       "sse": self.linear_sse},
        }


def fit_index(observations) -> IndexFit:
    """Fit u_n observations with a power law (regression on log u) and a line.

    ``observations`` is a sequence of (n, u_n) pairs with positive u_n; at
    least three points are required. Residual sums are reported in the
    original units for both fits so they are directly comparable.
    """
    obs = np.asarray(list(observations), dtype=float)
    if obs.ndim != 2 or obs.shape[1] != 2 or obs.shape[0] < 3:
        raise InsufficientData("need at least three (n, u) observations")
    n, u = obs[:, 0], obs[:, 1]
    if np.min(u) <= 0:
        raise InsufficientData("index observations must be positive")

    alpha, log_u0 = np.polyfit(n, np.log(u), 1)
    power = PowerLawIndex(u0=float(np.exp(log_u0)), alpha=float(alpha))
    power_sse = float(np.sum((u - power.u0 * np.exp(power.alpha * n)) ** 2))

    slope, intercept = np.polyfit(n, u, 1)
    linear = LinearIndex(u0=float(intercept), slope=float(slope))
    linear_sse = float(np.sum((u - (linear.u0 + linear.slope * n)) ** 2))

    return IndexFit(power_law=power, power_law_sse=power_sse,
                    linear=linear, linear_sse=linear_sse)
