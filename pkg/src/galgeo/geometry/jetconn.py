# src/galgeo/geometry/jetconn.py
"""Nonlinear connection on TJ^1 and its affine covariant derivative.

Adapted frame, flat index layout:
    0            d/dt      = ∂t + y^j ∂x_j - Γ^j ∂y_j
    1..n         δ/δx^k    = ∂x_k - N^j_k ∂y_j
    n+1..2n      ∂/∂y^k
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.galgeo.base import EvaluationDomainError
from src.galgeo.geometry.connection import GalileanConnection, SecondOrderSystem, chern_connection
from src.galgeo.schema import AppendixReport, PointError
from src.galgeo.symbolic.expr import ZERO, ChartPoint, Const, Expression, Var, add, differentiate, mul, neg, simplify, sub

logger = logging.getLogger(__name__)


class FrameKind(str, Enum):
    TIME = "d/dt"
    HORIZONTAL = "delta/delta x"
    VERTICAL = "d/dy"


@dataclass(frozen=True)
class FrameIndex:
    kind: FrameKind
    index: int = 0  # 1-based for horizontal/vertical

    @classmethod
    def time(cls) -> "FrameIndex":
        return cls(FrameKind.TIME, 0)

    @classmethod
    def horizontal(cls, k: int) -> "FrameIndex":
        return cls(FrameKind.HORIZONTAL, k)

    @classmethod
    def vertical(cls, k: int) -> "FrameIndex":
        return cls(FrameKind.VERTICAL, k)

    def flat(self, n: int) -> int:
        if self.kind == FrameKind.TIME:
            return 0
        if not 1 <= self.index <= n:
            raise ValueError(f"frame index {self.index} out of range for n={n}")
        return self.index if self.kind == FrameKind.HORIZONTAL else n + self.index

    def __str__(self) -> str:
        if self.kind == FrameKind.TIME:
            return "d/dt"
        if self.kind == FrameKind.HORIZONTAL:
            return f"δ/δx{self.index}"
        return f"∂/∂y{self.index}"


# ============================================================================
# NONLINEAR CONNECTION
# ============================================================================
@dataclass(frozen=True, eq=False)
class NonlinearConnection:
    """Semispray Γ^i, horizontal coefficients N^i_j and the affine Γ^i_jk."""

    n: int
    gamma: Tuple[Expression, ...]
    N: Tuple[Tuple[Expression, ...], ...]
    affine: Optional[Tuple[Tuple[Tuple[Expression, ...], ...], ...]] = None

    def __post_init__(self) -> None:
        n = self.n
        if len(self.gamma) != n or len(self.N) != n or any(len(row) != n for row in self.N):
            raise ValueError(f"gamma and N must match dimension n={n}")
        if self.affine is None:
            # default Γ^i_jk = 1/2 ∂²Γ^i/∂y^j∂y^k
            affine = tuple(
                tuple(
                    tuple(
                        simplify(mul(Const(0.5), differentiate(differentiate(g, Var.velocity(j + 1)), Var.velocity(k + 1))))
                        for k in range(n)
                    )
                    for j in range(n)
                )
                for g in self.gamma
            )
            object.__setattr__(self, "affine", affine)

    @classmethod
    def chern(cls, system: SecondOrderSystem) -> "NonlinearConnection":
        """N = 1/2 ∂Γ/∂y."""
        N = tuple(tuple(simplify(mul(Const(0.5), e)) for e in row) for row in system.velocity_jacobian)
        return cls(system.n, system.gamma, N)

    @classmethod
    def from_connection(cls, conn: GalileanConnection) -> "NonlinearConnection":
        return cls(conn.n, conn.gamma, conn.N, conn.GammaAffine)

    def with_N(self, N: Sequence[Sequence[Expression]]) -> "NonlinearConnection":
        return NonlinearConnection(self.n, self.gamma, tuple(tuple(row) for row in N), self.affine)


# ============================================================================
# ADAPTED VECTOR FIELDS
# ============================================================================
@dataclass(frozen=True, eq=False)
class AdaptedVectorField:
    """Expression components over (d/dt, δ/δx^1..n, ∂/∂y^1..n)."""

    conn: NonlinearConnection
    components: Tuple[Expression, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != 2 * self.conn.n + 1:
            raise ValueError(f"expected {2 * self.conn.n + 1} components, got {len(self.components)}")

    @classmethod
    def zero(cls, conn: NonlinearConnection) -> "AdaptedVectorField":
        return cls(conn, (ZERO,) * (2 * conn.n + 1))

    @classmethod
    def basis(cls, conn: NonlinearConnection, frame: FrameIndex) -> "AdaptedVectorField":
        components = [ZERO] * (2 * conn.n + 1)
        components[frame.flat(conn.n)] = Const(1.0)
        return cls(conn, tuple(components))

    @property
    def n(self) -> int:
        return self.conn.n

    def __add__(self, other: "AdaptedVectorField") -> "AdaptedVectorField":
        return AdaptedVectorField(self.conn, tuple(add(a, b) for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "AdaptedVectorField":
        return AdaptedVectorField(self.conn, tuple(neg(a) for a in self.components))

    def __sub__(self, other: "AdaptedVectorField") -> "AdaptedVectorField":
        return AdaptedVectorField(self.conn, tuple(sub(a, b) for a, b in zip(self.components, other.components)))

    def scale(self, factor: Expression) -> "AdaptedVectorField":
        return AdaptedVectorField(self.conn, tuple(mul(factor, a) for a in self.components))

    def simplify(self) -> "AdaptedVectorField":
        return AdaptedVectorField(self.conn, tuple(simplify(a) for a in self.components))

    def evaluate(self, point: ChartPoint) -> np.ndarray:
        return np.array([c.evaluate(point) for c in self.components])

    def time_part(self, point: ChartPoint) -> float:
        return self.components[0].evaluate(point)

    def horizontal_part(self, point: ChartPoint) -> np.ndarray:
        return np.array([c.evaluate(point) for c in self.components[1:self.n + 1]])

    def vertical_part(self, point: ChartPoint) -> np.ndarray:
        return np.array([c.evaluate(point) for c in self.components[self.n + 1:]])


# ============================================================================
# FRAME CHANGE
# ============================================================================
def to_coordinate_frame(v: AdaptedVectorField) -> Tuple[Expression, ...]:
    """Components over (∂t, ∂x_1..n, ∂y_1..n)."""
    n, conn = v.n, v.conn
    a_t = v.components[0]
    a_x = v.components[1:n + 1]
    a_y = v.components[n + 1:]
    c_x = [add(mul(a_t, Var.velocity(j + 1)), a_x[j]) for j in range(n)]
    c_y = []
    for j in range(n):
        value = sub(a_y[j], mul(a_t, conn.gamma[j]))
        for k in range(n):
            value = sub(value, mul(a_x[k], conn.N[j][k]))
        c_y.append(simplify(value))
    return (a_t, *(simplify(c) for c in c_x), *c_y)


def from_coordinate_frame(conn: NonlinearConnection, components: Sequence[Expression]) -> AdaptedVectorField:
    """Inverse of `to_coordinate_frame`."""
    n = conn.n
    if len(components) != 2 * n + 1:
        raise ValueError(f"expected {2 * n + 1} components, got {len(components)}")
    c_t = components[0]
    a_x = [simplify(sub(components[1 + j], mul(Var.velocity(j + 1), c_t))) for j in range(n)]
    a_y = []
    for j in range(n):
        value = add(components[n + 1 + j], mul(conn.gamma[j], c_t))
        for k in range(n):
            value = add(value, mul(conn.N[j][k], a_x[k]))
        a_y.append(simplify(value))
    return AdaptedVectorField(conn, (c_t, *a_x, *a_y))


def commutator(u: AdaptedVectorField, v: AdaptedVectorField) -> AdaptedVectorField:
    """[u, v] through coordinate components: [U, V]^c = U^b ∂_b V^c - V^b ∂_b U^c."""
    if u.n != v.n:
        raise ValueError("vector fields belong to different dimensions")
    n = u.n
    U, V = to_coordinate_frame(u), to_coordinate_frame(v)
    variables = [Var.from_chart_index(b, n) for b in range(2 * n + 1)]
    out = []
    for c in range(2 * n + 1):
        value: Expression = ZERO
        for b, var in enumerate(variables):
            if not U[b].is_constant(0.0):
                value = add(value, mul(U[b], differentiate(V[c], var)))
            if not V[b].is_constant(0.0):
                value = sub(value, mul(V[b], differentiate(U[c], var)))
        out.append(simplify(value))
    return from_coordinate_frame(u.conn, out)


# ============================================================================
# COVARIANT DERIVATIVE AND TORSION
# ============================================================================
def covariant_derivative(X: FrameIndex, Y: FrameIndex, conn: NonlinearConnection) -> AdaptedVectorField:
    """∇_X Y on adapted frame fields.

    ∇ d/dt = 0 in every direction
    ∇_{d/dt} δ/δx^k = N^j_k δ/δx^j        ∇_{d/dt} ∂/∂y^k = N^j_k ∂/∂y^j
    ∇_{δ/δx^j} δ/δx^k = Γ^l_jk δ/δx^l     ∇_{δ/δx^j} ∂/∂y^k = 0
    ∇_{∂/∂y^j} δ/δx^k = 0                 ∇_{∂/∂y^j} ∂/∂y^k = Γ^l_jk ∂/∂y^l
    """
    n = conn.n
    components: List[Expression] = [ZERO] * (2 * n + 1)
    if Y.kind == FrameKind.TIME:
        return AdaptedVectorField(conn, tuple(components))
    X.flat(n)
    Y.flat(n)
    k = Y.index - 1
    offset = 1 if Y.kind == FrameKind.HORIZONTAL else n + 1
    if X.kind == FrameKind.TIME:
        for j in range(n):
            components[offset + j] = conn.N[j][k]
    elif X.kind == FrameKind.HORIZONTAL and Y.kind == FrameKind.HORIZONTAL:
        for l in range(n):
            components[offset + l] = conn.affine[l][X.index - 1][k]
    elif X.kind == FrameKind.VERTICAL and Y.kind == FrameKind.VERTICAL:
        for l in range(n):
            components[offset + l] = conn.affine[l][X.index - 1][k]
    return AdaptedVectorField(conn, tuple(components))


def torsion(X: FrameIndex, Y: FrameIndex, conn: NonlinearConnection) -> AdaptedVectorField:
    """T(X, Y) = ∇_X Y - ∇_Y X - [X, Y]."""
    bracket = commutator(AdaptedVectorField.basis(conn, X), AdaptedVectorField.basis(conn, Y))
    return (covariant_derivative(X, Y, conn) - covariant_derivative(Y, X, conn) - bracket).simplify()


# ============================================================================
# CROSS-CHECK
# ============================================================================
def appendix_cross_check(
    system: SecondOrderSystem,
    conn: GalileanConnection,
    points: Sequence[ChartPoint],
    tol: float,
) -> AppendixReport:
    """Compare the jet-side torsion picture with the Cartan-side connection.

    Residuals (pass criteria):
      chern_vertical_torsion  vertical part of T(∂/∂y^k, d/dt) for N = 1/2 ∂Γ/∂y
      chern_N_agreement       that N against chern_connection(system).N
      normalization_identity  ∂Γ/∂y - 2N + D for the supplied connection
    Info (no criterion):
      supplied_vertical_torsion, commutator_vertical
    """
    n = system.n
    chern = NonlinearConnection.chern(system)
    cartan_chern = chern_connection(system)
    supplied = NonlinearConnection.from_connection(conn)
    time = FrameIndex.time()
    chern_torsion = [torsion(FrameIndex.vertical(k + 1), time, chern) for k in range(n)]
    supplied_torsion = [torsion(FrameIndex.vertical(k + 1), time, supplied) for k in range(n)]
    brackets = [
        commutator(AdaptedVectorField.basis(chern, FrameIndex.vertical(k + 1)), AdaptedVectorField.basis(chern, time))
        for k in range(n)
    ]
    gamma_y = system.velocity_jacobian

    residuals = {"chern_vertical_torsion": 0.0, "chern_N_agreement": 0.0, "normalization_identity": 0.0}
    info = {"supplied_vertical_torsion": 0.0, "commutator_vertical": 0.0}
    errors: List[PointError] = []
    for point in points:
        try:
            values: Dict[str, float] = {
                "chern_vertical_torsion": max(float(np.max(np.abs(t.vertical_part(point)))) for t in chern_torsion),
                "chern_N_agreement": float(
                    np.max(np.abs(_evaluate_matrix(chern.N, point) - cartan_chern.N_at(point)))
                ),
                "normalization_identity": float(
                    np.max(
                        np.abs(
                            _evaluate_matrix(gamma_y, point)
                            - 2.0 * conn.N_at(point)
                            + conn.normalization.evaluate_D(point)
                        )
                    )
                ),
            }
            extra = {
                "supplied_vertical_torsion": max(float(np.max(np.abs(t.vertical_part(point)))) for t in supplied_torsion),
                "commutator_vertical": max(float(np.max(np.abs(b.vertical_part(point)))) for b in brackets),
            }
        except EvaluationDomainError as exc:
            errors.append(PointError(point=point.as_array().tolist(), error=str(exc)))
            continue
        for name, value in values.items():
            residuals[name] = max(residuals[name], value)
        for name, value in extra.items():
            info[name] = max(info[name], value)

    evaluated = len(points) - len(errors)
    passed = evaluated > 0 and all(value <= tol for value in residuals.values())
    return AppendixReport(
        tolerance=tol, points_checked=len(points), residuals=residuals, info=info, errors=errors, passed=passed
    )


def _evaluate_matrix(matrix: Sequence[Sequence[Expression]], point: ChartPoint) -> np.ndarray:
    return np.array([[e.evaluate(point) for e in row] for row in matrix])
