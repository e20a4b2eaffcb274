"""SO(M) machinery for loan-state rotations.

An M-period loan can be re-expressed in any rotated orthonormal basis; the
diagonal of a rotated operator is a doubly stochastic mixture of the original
period values, so totals (traces) are preserved while individual payments
move. Angle vectors are ordered over the rotation planes (i,j), i < j,
lexicographically: (1,2), (1,3), ..., (1,M), (2,3), ..., (M-1,M). The matrix
is the left-to-right composition of one plane rotation per angle, the first
listed plane acting first; each factor equals the matrix exponential of a
single antisymmetric generator, so the whole thing is the usual exponential
parametrization applied one generator at a time. For M=3 the composition is
plane (2,3), then (1,3), then (1,2) reading right to left, i.e. angles
(theta, gamma, phi) in the conventional naming used throughout this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NegativeRadicand,
    SingularParametrization,
)
from .operators import LoanOperators

ORTHOGONALITY_TOL = 1e-12
DETERMINANT_TOL = 1e-10


def generator_count(dim: int) -> int:
    """Number of independent rotation planes, M(M-1)/2."""
    return dim * (dim - 1) // 2


def plane_order(dim: int) -> list[tuple[int, int]]:
    """Lexicographic plane list matching the angle-vector layout (1-based)."""
    return [(i, j) for i in range(1, dim + 1) for j in range(i + 1, dim + 1)]


@dataclass(frozen=True)
class RotationSpec:
    """An SO(M) element together with the angle vector that produced it."""

    dim: int
    angles: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        u = self.matrix
        if u.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix shape {u.shape} does not match dim {self.dim}")
        ortho = np.max(np.abs(u @ u.T - np.eye(self.dim)))
        if ortho >= ORTHOGONALITY_TOL:
            raise DimensionMismatch(f"matrix is not orthogonal (max |UU^T - I| = {ortho:.3e})")
        det = np.linalg.det(u)
        if abs(det - 1.0) > DETERMINANT_TOL:
            raise DimensionMismatch(f"matrix determinant {det!r} is not 1")

    def weights(self) -> np.ndarray:
        """Elementwise square of the matrix: the doubly stochastic mixing weights."""
        return self.matrix * self.matrix


def rotation_from_angles(dim: int, angles) -> RotationSpec:
    """Compose the rotation for a full angle vector of length M(M-1)/2."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    expected = generator_count(dim)
    if angles.shape != (expected,):
        raise DimensionMismatch(
            f"angle vector has shape {angles.shape}, expected ({expected},) for dim {dim}"
        )
    planes = plane_order(dim)
    plane_i = np.array([i - 1 for i, _ in planes], dtype=np.int64)
    plane_j = np.array([j - 1 for _, j in planes], dtype=np.int64)
    matrix = _kernels.givens_compose(dim, plane_i, plane_j, angles)
    return RotationSpec(dim=dim, angles=angles, matrix=matrix)


def subgroup_rotation(dim: int, plane: tuple[int, int], angle: float) -> RotationSpec:
    """Rotation in a single plane (1-based indices), identity elsewhere.

    Diagonal entries outside the plane are untouched, so payments at every
    period k not in {i, j} keep their original values after the rotation.
    """
    i, j = plane
    if not (1 <= i < j <= dim):
        raise IndexOutOfRange(f"plane {plane} invalid for dim {dim}")
    matrix = np.eye(dim)
    c, s = math.cos(angle), math.sin(angle)
    matrix[i - 1, i - 1] = c
    matrix[j - 1, j - 1] = c
    matrix[i - 1, j - 1] = s
    matrix[j - 1, i - 1] = -s
    angles = np.zeros(generator_count(dim))
    angles[plane_order(dim).index((i, j))] = angle
    return RotationSpec(dim=dim, angles=angles, matrix=matrix)


def _as_matrix(u: RotationSpec | np.ndarray) -> np.ndarray:
    return u.matrix if isinstance(u, RotationSpec) else np.asarray(u, dtype=float)


def rotate_operator(u: RotationSpec | np.ndarray, operator: np.ndarray) -> np.ndarray:
    """Similarity transform U O U^T (U^-1 = U^T for orthogonal U)."""
    mat = _as_matrix(u)
    operator = np.asarray(operator, dtype=float)
    if operator.shape != mat.shape:
        raise DimensionMismatch(
            f"operator shape {operator.shape} does not match rotation {mat.shape}"
        )
    return mat @ operator @ mat.T


def rotate_diagonal(u: RotationSpec | np.ndarray, values: np.ndarray) -> np.ndarray:
    """Diagonal of the rotated diagonal operator: the weight mix W @ values."""
    mat = _as_matrix(u)
    values = np.asarray(values, dtype=float)
    if values.shape != (mat.shape[0],):
        raise DimensionMismatch(
            f"value vector length {values.shape} does not match rotation {mat.shape}"
        )
    return (mat * mat) @ values


@dataclass(frozen=True)
class RotatedSchedule:
    """Period mean values of the rotated loan operators, plus per-period risk."""

    qbar: np.ndarray
    abar: np.ndarray
    ybar: np.ndarray
    dbar: np.ndarray
    risk: np.ndarray


def _dispersion(weights_row: np.ndarray, values: np.ndarray) -> float:
    # <v^2> - <v>^2 in the shifted form sum w (v - <v>)^2, which cannot cancel
    mean = float(weights_row @ values)
    var = float(weights_row @ (values - mean) ** 2)
    return math.sqrt(max(var, 0.0))


def rotated_schedule(u: RotationSpec | np.ndarray, ops: LoanOperators) -> RotatedSchedule:
    """Mean values <n|O_bar|n> of all four rotated loan operators.

    Totals are invariant (the diagonal mix is doubly stochastic) and every
    rotated entry lies between the smallest and largest original value; both
    facts are asserted before returning.
    """
    mat = _as_matrix(u)
    if mat.shape != (ops.dim, ops.dim):
        raise DimensionMismatch(f"rotation {mat.shape} does not match operators dim {ops.dim}")
    weights = mat * mat
    q = ops.diagonal("installment")
    qbar = weights @ q
    result = RotatedSchedule(
        qbar=qbar,
        abar=weights @ ops.diagonal("amortization"),
        ybar=weights @ ops.diagonal("interest"),
        dbar=weights @ ops.diagonal("debt"),
        risk=np.array([_dispersion(weights[n], q) for n in range(ops.dim)]),
    )
    scale = max(abs(float(np.sum(q))), abs(ops.d0), 1.0)
    if abs(float(np.sum(qbar)) - float(np.sum(q))) > 1e-9 * scale:
        raise RuntimeError("rotation failed to preserve the installment total")
    lo, hi = np.min(q), np.max(q)
    if np.min(qbar) < lo - 1e-9 * scale or np.max(qbar) > hi + 1e-9 * scale:
        raise RuntimeError("rotated installment left the convex hull of the originals")
    return result


def risk_variance(u: RotationSpec | np.ndarray, ops: LoanOperators, n: int) -> float:
    """Dispersion of the rotated installment operator in basis state n.

    sqrt(<n|Q_bar^2|n> - <n|Q_bar|n>^2); for M=2 this equals
    |sin(phi) cos(phi)| |q_1 - q_2|.
    """
    mat = _as_matrix(u)
    if mat.shape != (ops.dim, ops.dim):
        raise DimensionMismatch(f"rotation {mat.shape} does not match operators dim {ops.dim}")
    if not 1 <= n <= ops.dim:
        raise IndexOutOfRange(f"period {n} outside 1..{ops.dim}")
    weights_row = mat[n - 1] * mat[n - 1]
    return _dispersion(weights_row, ops.diagonal("installment"))


def risk_moment_gap_m2(phi: float, q1: float, q2: float) -> tuple[float, float]:
    """Closed-form M=2 dispersion variant sqrt(<Q_bar^2> - <Q_bar>), i.e.

        sqrt((q1 - 1) q1 cos^2(phi) + (q2 - 1) q2 sin^2(phi))

    and the sin/cos swap for the second period. This subtracts the unsquared
    mean, so it is dimensionally inconsistent with :func:`risk_variance` and
    only coincides with it where installments are 0 or 1 currency units; it is
    provided for comparison, not as the default risk measure. Raises
    :class:`NegativeRadicand` where the expression goes negative (possible
    whenever some installment lies strictly between 0 and 1).
    """
    c2 = math.cos(phi) ** 2
    s2 = math.sin(phi) ** 2
    first = (q1 - 1.0) * q1 * c2 + (q2 - 1.0) * q2 * s2
    second = (q2 - 1.0) * q2 * c2 + (q1 - 1.0) * q1 * s2
    if first < 0 or second < 0:
        raise NegativeRadicand(f"moment-gap expression negative: ({first!r}, {second!r})")
    return math.sqrt(first), math.sqrt(second)


def m3_installments_closed_form(theta: float, gamma: float, phi: float,
                                q) -> np.ndarray:
    """Closed-form trigonometric expressions for the three rotated installments.

    Written in x = sin(phi), y = sin(theta), z = sin(gamma):

        qbar_1 = y^2 (1-x^2) q1 + (1-y^2)/(1-2z^2) [(1-z^2) q2 - z^2 q3]
                 + x^2 y^2 /(1-2z^2) [(1-z^2) q3 - z^2 q2]
        qbar_2 = (1-x^2)(1-y^2) q1 + y^2/(1-2z^2) [(1-z^2) q2 - z^2 q3]
                 + x^2 (1-y^2)/(1-2z^2) [(1-z^2) q3 - z^2 q2]
        qbar_3 = x^2 q1 + (1-x^2)/(1-2z^2) [(1-z^2) q3 - z^2 q2]

    These are NOT the diagonal of any orthogonal similarity transform: the
    coefficients are unbounded near z^2 = 1/2 and at zero angles the result is
    (q2, q1, q3) instead of (q1, q2, q3). They are kept verbatim as a
    comparison target; :func:`compare_m3_closed_form` quantifies how far they
    sit from the matrix ground truth. Raises
    :class:`SingularParametrization` at the 1 - 2 z^2 = 0 pole
    (2*gamma = pi/2 + k*pi).
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise DimensionMismatch(f"expected 3 installments, got shape {q.shape}")
    x, y, z = math.sin(phi), math.sin(theta), math.sin(gamma)
    pole = 1.0 - 2.0 * z * z
    if abs(pole) < 1e-12:
        raise SingularParametrization("closed form is singular at sin(gamma)^2 = 1/2")
    mix23 = ((1.0 - z * z) * q[1] - z * z * q[2]) / pole
    mix32 = ((1.0 - z * z) * q[2] - z * z * q[1]) / pole
    x2, y2 = x * x, y * y
    return np.array([
        y2 * (1.0 - x2) * q[0] + (1.0 - y2) * mix23 + x2 * y2 * mix32,
        (1.0 - x2) * (1.0 - y2) * q[0] + y2 * mix23 + x2 * (1.0 - y2) * mix32,
        x2 * q[0] + (1.0 - x2) * mix32,
    ])


@dataclass(frozen=True)
class M3Comparison:
    closed_form: np.ndarray
    matrix_truth: np.ndarray
    deviation: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.deviation)))

    def to_json(self) -> dict:
        return {
            "closed_form": self.closed_form.tolist(),
            "matrix_truth": self.matrix_truth.tolist(),
            "deviation": self.deviation.tolist(),
            "max_deviation": self.max_deviation,
        }


def compare_m3_closed_form(theta: float, gamma: float, phi: float, q) -> M3Comparison:
    """Closed-form M=3 installments against the matrix ground truth.

    The ground truth composes the plane rotations (2,3) by theta, (1,3) by
    gamma, (1,2) by phi (an always-orthogonal matrix) and mixes the
    installments with its squared entries. The two generally disagree; the
    report records the per-entry deviation rather than pretending otherwise.
    """
    q = np.asarray(q, dtype=float)
    closed = m3_installments_closed_form(theta, gamma, phi, q)
    spec = rotation_from_angles(3, [phi, gamma, theta])
    truth = rotate_diagonal(spec, q)
    return M3Comparison(closed_form=closed, matrix_truth=truth, deviation=closed - truth)
