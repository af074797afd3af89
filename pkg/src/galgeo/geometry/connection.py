# src/galgeo/geometry/connection.py
"""Galilean Cartan connection of a second-order system in normal coordinates.

Everything is computed on the section A = I; constant gauges are reached
through `GalileanConnection.in_gauge`.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.galgeo.base import EvaluationDomainError, IndexRangeError, SingularCoframeError, SymmetryViolationError
from src.galgeo.config import settings
from src.galgeo.geometry.forms import (
    DifferentialForm,
    TangentVector,
    contact,
    dt,
    dy,
    numeric_exterior_derivative,
    pointwise_wedge,
    to_adapted_basis_many,
)
from src.galgeo.geometry.model import GalileanAlgebraElement, checked_inverse
from src.galgeo.schema import PointError, StructureReport
from src.galgeo.symbolic.expr import ZERO, ChartPoint, Const, Expression, Var, add, differentiate, mul, simplify
from src.galgeo.symbolic.parser import parse
from src.galgeo.utils.tensors import tensor_entries, transform_tensor

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[Expression, ...], ...]
Tensor3 = Tuple[Tuple[Tuple[Expression, ...], ...], ...]
FormMatrix = Tuple[Tuple[DifferentialForm, ...], ...]


def _sum_forms(n: int, degree: int, forms: Sequence[DifferentialForm]) -> DifferentialForm:
    total = DifferentialForm.zero(n, degree)
    for form in forms:
        total = total + form
    return total


def _check_dimension(expression: Expression, n: int) -> None:
    for var in expression.variables():
        if var.kind != "t" and var.index > n:
            raise IndexRangeError(f"variable {var.name} index out of range for n={n}", None, expression.to_text())


# ============================================================================
# INPUT DATA
# ============================================================================
@dataclass(frozen=True, eq=False)
class SecondOrderSystem:
    """x''^i + Gamma^i(t, x, x') = 0."""

    n: int
    gamma: Tuple[Expression, ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", tuple(self.gamma))
        if self.n < 1:
            raise ValueError(f"dimension must be positive, got {self.n}")
        if len(self.gamma) != self.n:
            raise ValueError(f"expected {self.n} gamma expressions, got {len(self.gamma)}")
        for expression in self.gamma:
            _check_dimension(expression, self.n)

    @classmethod
    def from_strings(cls, sources: Sequence[str], n: Optional[int] = None, name: str = "") -> "SecondOrderSystem":
        n = len(sources) if n is None else n
        return cls(n, tuple(parse(source, n) for source in sources), name)

    @cached_property
    def velocity_jacobian(self) -> Matrix:
        """d Gamma^i / d y^j."""
        return tuple(
            tuple(differentiate(g, Var.velocity(j + 1)) for j in range(self.n)) for g in self.gamma
        )

    def evaluate(self, point: ChartPoint) -> np.ndarray:
        return np.array([g.evaluate(point) for g in self.gamma])

    def spray(self, point: ChartPoint) -> np.ndarray:
        """Geodesic spray (1, y, -Gamma) at a point."""
        return np.concatenate([[1.0], point.y, -self.evaluate(point)])


@dataclass(frozen=True, eq=False)
class NormalizationChoice:
    """The free data D^i_j and Q^i_(jk) of the classification."""

    n: int
    D: Matrix
    Qsym: Tensor3

    def __post_init__(self) -> None:
        n = self.n
        object.__setattr__(self, "D", tuple(tuple(row) for row in self.D))
        object.__setattr__(self, "Qsym", tuple(tuple(tuple(row) for row in m) for m in self.Qsym))
        if len(self.D) != n or any(len(row) != n for row in self.D):
            raise ValueError(f"D must be {n}x{n}")
        if len(self.Qsym) != n or any(len(m) != n or any(len(row) != n for row in m) for m in self.Qsym):
            raise ValueError(f"Qsym must be {n}x{n}x{n}")
        for i in range(n):
            for j in range(n):
                _check_dimension(self.D[i][j], n)
                for k in range(n):
                    _check_dimension(self.Qsym[i][j][k], n)
                    if k > j and self.Qsym[i][j][k] != self.Qsym[i][k][j]:
                        raise SymmetryViolationError((i + 1, j + 1, k + 1))

    @classmethod
    def zeros(cls, n: int) -> "NormalizationChoice":
        return cls(n, ((ZERO,) * n,) * n, (((ZERO,) * n,) * n,) * n)

    @classmethod
    def from_strings(
        cls,
        n: int,
        D: Optional[Sequence[Sequence[str]]] = None,
        Qsym: Optional[Sequence[Sequence[Sequence[str]]]] = None,
    ) -> "NormalizationChoice":
        zeros = cls.zeros(n)
        d_matrix = zeros.D if D is None else tuple(tuple(parse(s, n) for s in row) for row in D)
        q_tensor = zeros.Qsym if Qsym is None else tuple(
            tuple(tuple(parse(s, n) for s in row) for row in m) for m in Qsym
        )
        return cls(n, d_matrix, q_tensor)

    @property
    def is_zero(self) -> bool:
        return all(e.is_constant(0.0) for row in self.D for e in row) and all(
            e.is_constant(0.0) for m in self.Qsym for row in m for e in row
        )

    def evaluate_D(self, point: ChartPoint) -> np.ndarray:
        return np.array([[e.evaluate(point) for e in row] for row in self.D])

    def evaluate_Qsym(self, point: ChartPoint) -> np.ndarray:
        return np.array([[[e.evaluate(point) for e in row] for row in m] for m in self.Qsym])


# ============================================================================
# CONNECTION AND CURVATURE
# ============================================================================
@dataclass(frozen=True, eq=False)
class CurvatureForms:
    T: DifferentialForm
    Omega: Tuple[DifferentialForm, ...]
    Phi: Tuple[DifferentialForm, ...]
    R: FormMatrix

    def expressions(self) -> List[Expression]:
        forms = [self.T, *self.Omega, *self.Phi, *(f for row in self.R for f in row)]
        return [e for form in forms for e in form.expressions()]


@dataclass(frozen=True, eq=False)
class GalileanConnection:
    n: int
    gamma: Tuple[Expression, ...]
    N: Matrix
    GammaAffine: Tensor3
    tau: DifferentialForm
    omega: Tuple[DifferentialForm, ...]
    phi: Tuple[DifferentialForm, ...]
    Pi: FormMatrix
    normalization: NormalizationChoice
    # constant A of the section; None is the normal-coordinate gauge A = I
    gauge: Optional[np.ndarray] = field(default=None)

    @property
    def coframe(self) -> Tuple[DifferentialForm, ...]:
        return (self.tau, *self.omega, *self.phi)

    @cached_property
    def curvature_forms(self) -> CurvatureForms:
        return curvature(self)

    @cached_property
    def _algebra_forms(self) -> Tuple[DifferentialForm, ...]:
        return (self.tau, *self.omega, *self.phi, *(f for row in self.Pi for f in row))

    def coefficient_expressions(self) -> List[Expression]:
        """Every scalar the connection and its curvature are built from."""
        out = list(self.gamma)
        out += [e for row in self.N for e in row]
        out += [e for m in self.GammaAffine for row in m for e in row]
        out += [e for row in self.normalization.D for e in row]
        return out + self.curvature_forms.expressions()

    def in_gauge(self, A: np.ndarray) -> "GalileanConnection":
        return in_gauge(self, A)

    def evaluate_on(self, point: ChartPoint, v) -> GalileanAlgebraElement:
        return evaluate_on(self, point, v)

    def N_at(self, point: ChartPoint) -> np.ndarray:
        return np.array([[e.evaluate(point) for e in row] for row in self.N])


def build_connection(system: SecondOrderSystem, norm: Optional[NormalizationChoice] = None) -> GalileanConnection:
    """Normal-coordinate connection in the gauge A = I.

    N = 1/2 (dGamma/dy + D) and
    Gamma^l_rs = Q^l_(rs) + 1/2 d2Gamma^l/dy^r dy^s + 1/4 (dD^l_r/dy^s + dD^l_s/dy^r).
    """
    n = system.n
    norm = NormalizationChoice.zeros(n) if norm is None else norm
    if norm.n != n:
        raise ValueError(f"normalization is for n={norm.n}, system has n={n}")
    ys = [Var.velocity(j + 1) for j in range(n)]
    gamma_y = system.velocity_jacobian

    N = tuple(
        tuple(simplify(mul(Const(0.5), add(gamma_y[i][j], norm.D[i][j]))) for j in range(n)) for i in range(n)
    )

    affine: List[List[List[Expression]]] = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for l in range(n):
        for r in range(n):
            for s in range(r, n):
                value = add(norm.Qsym[l][r][s], mul(Const(0.5), differentiate(gamma_y[l][r], ys[s])))
                d_sym = add(differentiate(norm.D[l][r], ys[s]), differentiate(norm.D[l][s], ys[r]))
                value = simplify(add(value, mul(Const(0.25), d_sym)))
                affine[l][r][s] = value
                affine[l][s][r] = value
    GammaAffine = tuple(tuple(tuple(row) for row in m) for m in affine)

    tau = dt(n)
    omega = tuple(contact(n, i + 1) for i in range(n))
    phi = tuple(
        _sum_forms(n, 1, [dy(n, i + 1), tau.scale(system.gamma[i])] + [omega[k].scale(N[i][k]) for k in range(n)])
        for i in range(n)
    )
    Pi = tuple(
        tuple(
            _sum_forms(n, 1, [tau.scale(N[i][j])] + [omega[k].scale(GammaAffine[i][j][k]) for k in range(n)])
            for j in range(n)
        )
        for i in range(n)
    )
    logger.debug("built connection for %s (n=%d)", system.name or "system", n)
    return GalileanConnection(n, system.gamma, N, GammaAffine, tau, omega, phi, Pi, norm)


def chern_connection(system: SecondOrderSystem) -> GalileanConnection:
    """The normal connection with D = 0 and Q_(jk) = 0."""
    return build_connection(system, NormalizationChoice.zeros(system.n))


def curvature(conn: GalileanConnection) -> CurvatureForms:
    n = conn.n
    tau, omega, phi, Pi = conn.tau, conn.omega, conn.phi, conn.Pi
    T = tau.exterior_derivative()
    Omega = tuple(
        _sum_forms(
            n,
            2,
            [omega[i].exterior_derivative(), phi[i].wedge(tau)] + [Pi[i][j].wedge(omega[j]) for j in range(n)],
        ).simplify()
        for i in range(n)
    )
    Phi = tuple(
        _sum_forms(n, 2, [phi[i].exterior_derivative()] + [Pi[i][j].wedge(phi[j]) for j in range(n)]).simplify()
        for i in range(n)
    )
    R = tuple(
        tuple(
            _sum_forms(n, 2, [Pi[i][j].exterior_derivative()] + [Pi[i][k].wedge(Pi[k][j]) for k in range(n)]).simplify()
            for j in range(n)
        )
        for i in range(n)
    )
    return CurvatureForms(T, Omega, Phi, R)


def in_gauge(conn: GalileanConnection, A: np.ndarray) -> GalileanConnection:
    """The same connection read through the constant section (t, x, y) -> (t, x, y, A).

    omega -> A^-1 omega, phi -> A^-1 phi, Pi -> A^-1 Pi A.
    """
    n = conn.n
    A = np.asarray(A, dtype=float).reshape(n, n)
    A_inv = checked_inverse(A)

    def combine(weights: np.ndarray, forms: Sequence[DifferentialForm]) -> DifferentialForm:
        return _sum_forms(n, 1, [f.scale(float(w)) for w, f in zip(weights, forms) if w != 0.0])

    omega = tuple(combine(A_inv[i], conn.omega) for i in range(n))
    phi = tuple(combine(A_inv[i], conn.phi) for i in range(n))
    flat_pi = [f for row in conn.Pi for f in row]
    # (A^-1 Pi A)_ij = sum_kl A^-1_ik Pi_kl A_lj
    Pi = tuple(tuple(combine(np.outer(A_inv[i], A[:, j]).reshape(-1), flat_pi) for j in range(n)) for i in range(n))
    gauge = A if conn.gauge is None else conn.gauge @ A
    return GalileanConnection(
        n, conn.gamma, conn.N, conn.GammaAffine, conn.tau, omega, phi, Pi, conn.normalization, gauge
    )


def evaluate_on(conn: GalileanConnection, point: ChartPoint, v) -> GalileanAlgebraElement:
    """(tau, omega, phi, Pi) evaluated on a tangent vector at a point."""
    n = conn.n
    vector = v.as_array() if isinstance(v, TangentVector) else np.asarray(v, dtype=float)
    values = np.array([form.dense(point) @ vector for form in conn._algebra_forms])
    return GalileanAlgebraElement(values[0], values[1:n + 1], values[n + 1:2 * n + 1], values[2 * n + 1:].reshape(n, n))


# ============================================================================
# INVARIANTS
# ============================================================================
@dataclass(frozen=True, eq=False)
class CurvatureInvariants:
    """Slots of Phi^i = D τ∧φ + Q ω∧φ + P τ∧ω + 1/2 T ω∧ω at one point.

    `phi_phi` holds the φ∧φ slots, which vanish for normal connections.
    """

    D: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    Ttors: np.ndarray
    phi_phi: Optional[np.ndarray] = None
    point: Optional[ChartPoint] = None

    def __post_init__(self) -> None:
        n = np.asarray(self.D).shape[0]
        if self.phi_phi is None:
            object.__setattr__(self, "phi_phi", np.zeros((n, n, n)))

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def Q_symmetric(self) -> np.ndarray:
        return 0.5 * (self.Q + self.Q.transpose(0, 2, 1))

    @property
    def Q_antisymmetric(self) -> np.ndarray:
        return 0.5 * (self.Q - self.Q.transpose(0, 2, 1))

    def entries(self) -> Dict[str, float]:
        out: Dict[str, float] = {}
        out.update(tensor_entries("D", self.D))
        out.update(tensor_entries("Q", self.Q))
        out.update(tensor_entries("P", self.P))
        out.update(tensor_entries("Ttors", self.Ttors))
        return out

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(a)) for a in (self.D, self.Q, self.P, self.Ttors)))


def extract_invariants(conn: GalileanConnection, point: ChartPoint) -> CurvatureInvariants:
    n = conn.n
    D = np.zeros((n, n))
    P = np.zeros((n, n))
    Q = np.zeros((n, n, n))
    T = np.zeros((n, n, n))
    phi_phi = np.zeros((n, n, n))
    for i, adapted in enumerate(to_adapted_basis_many(conn.curvature_forms.Phi, conn, point)):
        D[i] = adapted.tau_phi
        P[i] = adapted.tau_omega
        Q[i] = adapted.omega_phi
        T[i] = adapted.omega_omega
        phi_phi[i] = adapted.phi_phi
    return CurvatureInvariants(D, Q, P, T, phi_phi, point)


def gauge_transform(inv: CurvatureInvariants, A: np.ndarray) -> CurvatureInvariants:
    """D, P -> A^-1 X A; Q, Ttors -> one A^-1 on the upper index, A on each lower."""
    A = np.asarray(A, dtype=float)
    A_inv = checked_inverse(A)
    return CurvatureInvariants(
        transform_tensor(inv.D, A, A_inv),
        transform_tensor(inv.Q, A, A_inv),
        transform_tensor(inv.P, A, A_inv),
        transform_tensor(inv.Ttors, A, A_inv),
        transform_tensor(inv.phi_phi, A, A_inv),
        inv.point,
    )


def deviation_eigenvalues(inv: CurvatureInvariants) -> np.ndarray:
    """Spectrum of the deviation tensor P, sorted by real then imaginary part."""
    values = np.linalg.eigvals(inv.P)
    return values[np.lexsort((values.imag, values.real))]


# ============================================================================
# STRUCTURE EQUATIONS
# ============================================================================
RESIDUAL_NAMES = ("dtau", "omega", "phi_oracle", "phi_phi")


def _point_residuals(conn: GalileanConnection, forms: CurvatureForms, point: ChartPoint) -> Dict[str, float]:
    n = conn.n
    residuals = {
        "dtau": forms.T.max_abs(point),
        "omega": max(form.max_abs(point) for form in forms.Omega),
    }

    # d(phi) + Pi ∧ phi from central differences against the symbolic Phi
    phi_values = [form.dense(point) for form in conn.phi]
    worst = 0.0
    for i in range(n):
        oracle = numeric_exterior_derivative(conn.phi[i], point)
        for j in range(n):
            oracle = oracle + pointwise_wedge(conn.Pi[i][j].dense(point), phi_values[j])
        worst = max(worst, float(np.max(np.abs(forms.Phi[i].dense(point) - oracle))))
    residuals["phi_oracle"] = worst

    adapted = to_adapted_basis_many(forms.Phi, conn, point)
    residuals["phi_phi"] = max(float(np.max(np.abs(a.phi_phi), initial=0.0)) for a in adapted)
    residuals["curvature_norm"] = max(f.max_abs(point) for row in forms.R for f in row)
    return residuals


def verify_structure_equations(
    conn: GalileanConnection,
    points: Sequence[ChartPoint],
    tol: float,
    workers: Optional[int] = None,
) -> StructureReport:
    """Max residuals of dτ, Ω, the Φ oracle and the φ∧φ slot over `points`.

    Points where evaluation fails are recorded in the report and skipped.
    """
    if not points:
        raise ValueError("at least one point is required")
    forms = conn.curvature_forms
    workers = settings.workers if workers is None else workers

    def run(point: ChartPoint):
        try:
            return _point_residuals(conn, forms, point), None
        except (EvaluationDomainError, SingularCoframeError, ValueError) as exc:
            return None, PointError(point=point.as_array().tolist(), error=str(exc))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        results = list(executor.map(run, points))

    residuals = {name: 0.0 for name in RESIDUAL_NAMES}
    curvature_norm = 0.0
    errors: List[PointError] = []
    evaluated = 0
    for values, error in results:
        if error is not None:
            errors.append(error)
            continue
        evaluated += 1
        for name in RESIDUAL_NAMES:
            residuals[name] = max(residuals[name], values[name])
        curvature_norm = max(curvature_norm, values["curvature_norm"])

    if errors:
        logger.warning("%d of %d points could not be evaluated", len(errors), len(points))
    passed = evaluated > 0 and all(value <= tol for value in residuals.values())
    return StructureReport(
        tolerance=tol,
        points_checked=len(points),
        points_failed=len(errors),
        residuals=residuals,
        curvature_norm=curvature_norm,
        errors=errors,
        passed=passed,
    )
