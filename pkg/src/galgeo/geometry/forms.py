# src/galgeo/geometry/forms.py
"""Differential forms on the chart (t, x1..xn, y1..yn).

Forms are stored over the coordinate coframe (dt, dx^1..dx^n, dy^1..dy^n),
indexed 0..2n, as a map from strictly increasing index tuples to expression
coefficients. The adapted coframe {tau, omega, phi} is only used pointwise,
through a pivoted linear solve.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from src.galgeo.base import DegreeOverflowError, SingularCoframeError
from src.galgeo.config import settings
from src.galgeo.symbolic.expr import (
    ZERO,
    ChartPoint,
    Const,
    Expression,
    Var,
    add,
    as_expression,
    differentiate,
    mul,
    simplify,
)

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]
Coefficient = Union[Expression, int, float]
MAX_DEGREE = 3


# ============================================================================
# TANGENT VECTORS
# ============================================================================
@dataclass(frozen=True)
class TangentVector:
    """Components (v_t, v_x, v_y) over (d/dt, d/dx^i, d/dy^i)."""

    t: float
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError("x and y components must have equal length")
        if not all(math.isfinite(v) for v in (self.t, *self.x, *self.y)):
            raise ValueError("TangentVector entries must be finite")

    @property
    def n(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x, *self.y], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float], n: Optional[int] = None) -> "TangentVector":
        values = [float(v) for v in values]
        if n is None:
            n = (len(values) - 1) // 2
        if len(values) != 2 * n + 1:
            raise ValueError(f"expected {2 * n + 1} components, got {len(values)}")
        return cls(values[0], tuple(values[1:n + 1]), tuple(values[n + 1:]))

    @classmethod
    def basis(cls, n: int, index: int) -> "TangentVector":
        values = np.zeros(2 * n + 1)
        values[index] = 1.0
        return cls.from_array(values, n)


def _sort_with_sign(indices: Sequence[int]) -> Tuple[int, Key]:
    """Sort an index tuple, returning the permutation sign (0 on repeats)."""
    if len(set(indices)) != len(indices):
        return 0, ()
    items = list(indices)
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return sign, tuple(items)


# ============================================================================
# DIFFERENTIAL FORMS
# ============================================================================
@dataclass(frozen=True, eq=False)
class DifferentialForm:
    n: int
    degree: int
    terms: Tuple[Tuple[Key, Expression], ...]

    # ---------- construction ----------
    @classmethod
    def from_terms(cls, n: int, degree: int, items: Iterable[Tuple[Sequence[int], Coefficient]]) -> "DifferentialForm":
        if not 0 <= degree <= MAX_DEGREE:
            raise DegreeOverflowError(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
        dim = 2 * n + 1
        acc: Dict[Key, Expression] = {}
        for indices, coefficient in items:
            indices = tuple(indices)
            if len(indices) != degree:
                raise ValueError(f"index tuple {indices} does not match degree {degree}")
            if any(not 0 <= i < dim for i in indices):
                raise ValueError(f"coframe index out of range in {indices} for n={n}")
            sign, key = _sort_with_sign(indices)
            if sign == 0:
                continue
            value = as_expression(coefficient)
            if sign < 0:
                value = mul(Const(-1.0), value)
            acc[key] = add(acc[key], value) if key in acc else value
        terms = tuple(sorted(((k, v) for k, v in acc.items() if not v.is_constant(0.0)), key=lambda kv: kv[0]))
        return cls(n, degree, terms)

    @classmethod
    def zero(cls, n: int, degree: int) -> "DifferentialForm":
        return cls.from_terms(n, degree, [])

    @classmethod
    def scalar(cls, n: int, coefficient: Coefficient) -> "DifferentialForm":
        return cls.from_terms(n, 0, [((), coefficient)])

    @classmethod
    def coordinate(cls, n: int, index: int) -> "DifferentialForm":
        return cls.from_terms(n, 1, [((index,), 1.0)])

    # ---------- accessors ----------
    @property
    def dimension(self) -> int:
        return 2 * self.n + 1

    @property
    def coefficients(self) -> Dict[Key, Expression]:
        return dict(self.terms)

    def coefficient(self, *indices: int) -> Expression:
        sign, key = _sort_with_sign(indices)
        if sign == 0:
            return ZERO
        value = self.coefficients.get(key, ZERO)
        return value if sign > 0 else mul(Const(-1.0), value)

    def expressions(self) -> List[Expression]:
        return [c for _, c in self.terms]

    def is_zero(self) -> bool:
        return not self.terms

    # ---------- algebra ----------
    def _check_compatible(self, other: "DifferentialForm") -> None:
        if self.n != other.n:
            raise ValueError(f"forms live on different charts (n={self.n} vs n={other.n})")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check_compatible(other)
        if self.degree != other.degree:
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        return DifferentialForm.from_terms(self.n, self.degree, list(self.terms) + list(other.terms))

    def __neg__(self) -> "DifferentialForm":
        return self.scale(-1.0)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, factor: Coefficient) -> "DifferentialForm":
        factor = as_expression(factor)
        return DifferentialForm.from_terms(self.n, self.degree, [(k, mul(factor, c)) for k, c in self.terms])

    def __mul__(self, factor: Coefficient) -> "DifferentialForm":
        return self.scale(factor)

    def __rmul__(self, factor: Coefficient) -> "DifferentialForm":
        return self.scale(factor)

    def wedge(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check_compatible(other)
        degree = self.degree + other.degree
        if degree > MAX_DEGREE:
            raise DegreeOverflowError(f"wedge of degrees {self.degree} and {other.degree} exceeds {MAX_DEGREE}")
        items = [(i + j, mul(a, b)) for i, a in self.terms for j, b in other.terms]
        return DifferentialForm.from_terms(self.n, degree, items)

    def exterior_derivative(self) -> "DifferentialForm":
        if self.degree >= MAX_DEGREE:
            raise DegreeOverflowError(f"d of a degree-{self.degree} form exceeds {MAX_DEGREE}")
        items = []
        for key, coefficient in self.terms:
            for c in coefficient.variables():
                partial = differentiate(coefficient, c)
                if not partial.is_constant(0.0):
                    items.append(((c.chart_index(self.n),) + key, partial))
        return DifferentialForm.from_terms(self.n, self.degree + 1, items).simplify()

    def simplify(self) -> "DifferentialForm":
        return DifferentialForm.from_terms(self.n, self.degree, [(k, simplify(c)) for k, c in self.terms])

    # ---------- evaluation ----------
    def coefficient_values(self, point: ChartPoint) -> Dict[Key, float]:
        return {k: c.evaluate(point) for k, c in self.terms}

    def dense(self, point: ChartPoint) -> np.ndarray:
        """Coefficient array at a point: scalar, vector, or antisymmetric matrix."""
        if self.degree == 0:
            return np.array(self.terms[0][1].evaluate(point) if self.terms else 0.0)
        if self.degree == 1:
            out = np.zeros(self.dimension)
            for (i,), c in self.terms:
                out[i] = c.evaluate(point)
            return out
        if self.degree == 2:
            out = np.zeros((self.dimension, self.dimension))
            for (i, j), c in self.terms:
                value = c.evaluate(point)
                out[i, j] = value
                out[j, i] = -value
            return out
        raise ValueError("dense arrays are only provided for degree <= 2")

    def max_abs(self, point: ChartPoint) -> float:
        values = self.coefficient_values(point).values()
        return max((abs(v) for v in values), default=0.0)

    def evaluate(self, point: ChartPoint, *vectors: TangentVector) -> float:
        """a(v_1, ..., v_k) = sum_I a_I det[v_j^{I_i}]."""
        if len(vectors) != self.degree:
            raise ValueError(f"a degree-{self.degree} form takes {self.degree} vectors, got {len(vectors)}")
        if self.degree == 0:
            return float(self.dense(point))
        frame = np.array([v.as_array() for v in vectors])
        total = 0.0
        for key, coefficient in self.terms:
            total += coefficient.evaluate(point) * float(np.linalg.det(frame[:, list(key)]))
        return total


# ============================================================================
# COORDINATE COFRAME
# ============================================================================
def dt(n: int) -> DifferentialForm:
    return DifferentialForm.coordinate(n, 0)


def dx(n: int, i: int) -> DifferentialForm:
    return DifferentialForm.coordinate(n, i)


def dy(n: int, i: int) -> DifferentialForm:
    return DifferentialForm.coordinate(n, n + i)


def contact(n: int, i: int) -> DifferentialForm:
    """The contact form dx^i - y^i dt."""
    return DifferentialForm.from_terms(n, 1, [((i,), 1.0), ((0,), -Var.velocity(i))])


# ============================================================================
# MODULE API
# ============================================================================
def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    return a.wedge(b)


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    return a.exterior_derivative()


def evaluate_one_form(a: DifferentialForm, point: ChartPoint, v: TangentVector) -> float:
    if a.degree != 1:
        raise ValueError(f"expected a 1-form, got degree {a.degree}")
    return float(a.dense(point) @ v.as_array())


def evaluate_two_form(a: DifferentialForm, point: ChartPoint, u: TangentVector, v: TangentVector) -> float:
    if a.degree != 2:
        raise ValueError(f"expected a 2-form, got degree {a.degree}")
    return float(u.as_array() @ a.dense(point) @ v.as_array())


def numeric_exterior_derivative(a: DifferentialForm, point: ChartPoint, h: Optional[float] = None) -> np.ndarray:
    """Central-difference da at a point as an antisymmetric matrix (a a 1-form)."""
    if a.degree != 1:
        raise ValueError(f"expected a 1-form, got degree {a.degree}")
    h = settings.fd_step if h is None else h
    base = point.as_array()
    jacobian = np.zeros((a.dimension, a.dimension))
    for c in range(a.dimension):
        step = np.zeros(a.dimension)
        step[c] = h
        plus = a.dense(ChartPoint.from_array(base + step, a.n))
        minus = a.dense(ChartPoint.from_array(base - step, a.n))
        jacobian[c] = (plus - minus) / (2.0 * h)
    return jacobian - jacobian.T


def finite_difference_two_form(
    a: DifferentialForm, point: ChartPoint, u: TangentVector, v: TangentVector, h: Optional[float] = None
) -> float:
    """Circulation oracle D_u(a(v)) - D_v(a(u)) with constant extensions of u, v."""
    if a.degree != 1:
        raise ValueError(f"expected a 1-form, got degree {a.degree}")
    h = settings.fd_step if h is None else h
    base = point.as_array()

    def directional(direction: TangentVector, argument: TangentVector) -> float:
        shift = h * direction.as_array()
        plus = evaluate_one_form(a, ChartPoint.from_array(base + shift, a.n), argument)
        minus = evaluate_one_form(a, ChartPoint.from_array(base - shift, a.n), argument)
        return (plus - minus) / (2.0 * h)

    return directional(u, v) - directional(v, u)


# ============================================================================
# ADAPTED COFRAME
# ============================================================================
class HasCoframe(Protocol):
    n: int

    @property
    def coframe(self) -> Sequence[DifferentialForm]: ...


def coframe_matrix(coframe: Sequence[DifferentialForm], point: ChartPoint) -> np.ndarray:
    """Rows are the coordinate components of tau, omega^i, phi^i at the point."""
    return np.array([form.dense(point) for form in coframe])


def pivoted_inverse(matrix: np.ndarray, pivot_ratio: Optional[float] = None) -> np.ndarray:
    """Inverse through an LU factorisation with partial pivoting.

    Raises SingularCoframeError when the smallest/largest pivot ratio drops
    below `pivot_ratio`.
    """
    pivot_ratio = settings.pivot_ratio if pivot_ratio is None else pivot_ratio
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix)
    pivots = np.abs(np.diag(lu))
    largest = pivots.max() if pivots.size else 0.0
    if largest == 0.0 or pivots.min() / largest < pivot_ratio:
        raise SingularCoframeError(f"coframe is singular (pivot ratio {pivots.min() / largest if largest else 0.0:.3e})")
    return lu_solve((lu, piv), np.eye(matrix.shape[0]))


@dataclass(frozen=True, eq=False)
class AdaptedTwoForm:
    """A 2-form at one point written over the adapted coframe.

    `matrix` is the full antisymmetric coefficient matrix indexed
    (tau, omega^1..omega^n, phi^1..phi^n); `coframe` holds the coordinate
    components of that coframe at the point.
    """

    n: int
    matrix: np.ndarray
    coframe: np.ndarray

    @property
    def tau_omega(self) -> np.ndarray:
        return self.matrix[0, 1:self.n + 1]

    @property
    def tau_phi(self) -> np.ndarray:
        return self.matrix[0, self.n + 1:]

    @property
    def omega_omega(self) -> np.ndarray:
        return self.matrix[1:self.n + 1, 1:self.n + 1]

    @property
    def omega_phi(self) -> np.ndarray:
        return self.matrix[1:self.n + 1, self.n + 1:]

    @property
    def phi_phi(self) -> np.ndarray:
        return self.matrix[self.n + 1:, self.n + 1:]

    def slots(self) -> Dict[str, float]:
        n = self.n
        out: Dict[str, float] = {}
        for j in range(n):
            out[f"tau^omega{j + 1}"] = float(self.tau_omega[j])
        for j in range(n):
            out[f"tau^phi{j + 1}"] = float(self.tau_phi[j])
        for j in range(n):
            for k in range(j + 1, n):
                out[f"omega{j + 1}^omega{k + 1}"] = float(self.omega_omega[j, k])
        for j in range(n):
            for k in range(n):
                out[f"omega{j + 1}^phi{k + 1}"] = float(self.omega_phi[j, k])
        for j in range(n):
            for k in range(j + 1, n):
                out[f"phi{j + 1}^phi{k + 1}"] = float(self.phi_phi[j, k])
        return out

    def evaluate(self, u: TangentVector, v: TangentVector) -> float:
        return float((self.coframe @ u.as_array()) @ self.matrix @ (self.coframe @ v.as_array()))

    def reconstruct(self) -> np.ndarray:
        """Coordinate-coframe antisymmetric matrix of the same 2-form."""
        return self.coframe.T @ self.matrix @ self.coframe


def to_adapted_basis(a: DifferentialForm, conn: HasCoframe, point: ChartPoint) -> AdaptedTwoForm:
    if a.degree != 2:
        raise ValueError(f"expected a 2-form, got degree {a.degree}")
    frame = coframe_matrix(conn.coframe, point)
    inverse = pivoted_inverse(frame)
    coefficients = inverse.T @ a.dense(point) @ inverse
    coefficients = 0.5 * (coefficients - coefficients.T)
    return AdaptedTwoForm(a.n, coefficients, frame)


def to_adapted_basis_many(forms: Sequence[DifferentialForm], conn: HasCoframe, point: ChartPoint) -> List[AdaptedTwoForm]:
    """Rewrite several 2-forms at one point, factorising the coframe once."""
    frame = coframe_matrix(conn.coframe, point)
    inverse = pivoted_inverse(frame)
    out: List[AdaptedTwoForm] = []
    for a in forms:
        if a.degree != 2:
            raise ValueError(f"expected a 2-form, got degree {a.degree}")
        coefficients = inverse.T @ a.dense(point) @ inverse
        out.append(AdaptedTwoForm(a.n, 0.5 * (coefficients - coefficients.T), frame))
    return out


def pointwise_wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Antisymmetric matrix of the wedge of two covectors."""
    return np.outer(a, b) - np.outer(b, a)
