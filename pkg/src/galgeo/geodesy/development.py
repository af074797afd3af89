# src/galgeo/geodesy/development.py
"""Developments of sampled curves into Gal_n and the model space J^1.

The development solves ρ̃'(s) = ρ̃(s) ξ(s) from ρ̃(s0) = e, with ξ the
connection (τ, ω, φ, Π) evaluated on the curve's tangent.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.galgeo.config import settings
from src.galgeo.geodesy.curve import CurveSamples, five_point_derivative, hermite_midpoint
from src.galgeo.geodesy.integrator import integrate_geodesic
from src.galgeo.geometry.connection import GalileanConnection, SecondOrderSystem
from src.galgeo.geometry.model import (
    GalileanElement,
    ModelPoint,
    compose,
    is_straight_line,
    project_to_model,
)
from src.galgeo.schema import GeodesicVerdict, StraightLineVerdict
from src.galgeo.symbolic.expr import ChartPoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DevelopmentResult:
    s: np.ndarray
    elements: Tuple[GalileanElement, ...]
    model_points: Tuple[ModelPoint, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def entries(self) -> List[Tuple[float, GalileanElement, ModelPoint]]:
        return [(float(s), g, p) for s, g, p in zip(self.s, self.elements, self.model_points)]

    def samples(self) -> List[Tuple[float, ModelPoint]]:
        return [(float(s), p) for s, p in zip(self.s, self.model_points)]

    @property
    def final(self) -> ModelPoint:
        return self.model_points[-1]

    def straight_line(self, tol: float) -> StraightLineVerdict:
        return is_straight_line(self.samples(), tol)


def _algebra_matrix(conn: GalileanConnection, values: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    return conn.evaluate_on(ChartPoint.from_array(values, conn.n), tangent).matrix


def develop(conn: GalileanConnection, curve: CurveSamples, drift_limit: Optional[float] = None) -> DevelopmentResult:
    """RK4 development of the curve starting from the identity.

    Midpoint stages use the cubic Hermite interpolant of the neighbouring
    samples; their tangent comes from the spray when the curve has one.
    """
    if curve.n != conn.n:
        raise ValueError(f"curve has n={curve.n}, connection has n={conn.n}")
    drift_limit = settings.drift_limit if drift_limit is None else drift_limit
    n = conn.n
    g = GalileanElement.identity(n)
    elements = [g]
    if len(curve) > 1:
        xi_next = _algebra_matrix(conn, curve.points[0], curve.tangents[0])
    for k in range(len(curve) - 1):
        h = float(curve.s[k + 1] - curve.s[k])
        p0, p1 = curve.points[k], curve.points[k + 1]
        v0, v1 = curve.tangents[k], curve.tangents[k + 1]
        mid, mid_tangent = hermite_midpoint(p0, v0, p1, v1, h)
        xi_start = xi_next
        xi_mid = _algebra_matrix(conn, mid, curve.tangent_at(mid, mid_tangent))
        xi_next = _algebra_matrix(conn, p1, v1)

        m = g.matrix
        k1 = m @ xi_start
        k2 = (m + 0.5 * h * k1) @ xi_mid
        k3 = (m + 0.5 * h * k2) @ xi_mid
        k4 = (m + h * k3) @ xi_next
        g = GalileanElement.snap(m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), drift_limit)
        elements.append(g)

    logger.debug("developed %d samples", len(elements))
    return DevelopmentResult(
        np.array(curve.s, dtype=float),
        tuple(elements),
        tuple(project_to_model(e) for e in elements),
    )


def pullback_residuals(conn: GalileanConnection, curve: CurveSamples) -> Tuple[float, float]:
    """max |ω(σ')| and max |φ(σ')| with σ' from a five-point difference of the samples.

    Curves with fewer than 5 samples fall back to their stored tangents.
    """
    if len(curve) >= 5:
        tangents = five_point_derivative(curve.points, curve.h)
        points = curve.points[2:-2]
    else:
        tangents = curve.tangents
        points = curve.points
    worst_omega = worst_phi = 0.0
    for values, tangent in zip(points, tangents):
        xi = conn.evaluate_on(ChartPoint.from_array(values, conn.n), tangent)
        worst_omega = max(worst_omega, float(np.max(np.abs(xi.x))))
        worst_phi = max(worst_phi, float(np.max(np.abs(xi.y))))
    return worst_omega, worst_phi


def check_curve_development(
    conn: GalileanConnection,
    curve: CurveSamples,
    tol: float,
    development: Optional[DevelopmentResult] = None,
) -> GeodesicVerdict:
    """Development is a straight line and ω, φ pull back to zero along the curve."""
    development = develop(conn, curve) if development is None else development
    straight = development.straight_line(tol)
    omega_pb, phi_pb = pullback_residuals(conn, curve)
    passed = straight.passed and omega_pb <= tol and phi_pb <= tol and not curve.truncated
    return GeodesicVerdict(
        passed=passed,
        status=curve.status,
        message=curve.message,
        samples=len(curve),
        truncated=curve.truncated,
        straight_line=straight,
        max_omega_pullback=omega_pb,
        max_phi_pullback=phi_pb,
        final_point=development.final.as_array().tolist(),
    )


def check_geodesic_development(
    conn: GalileanConnection,
    system: SecondOrderSystem,
    init: ChartPoint,
    s_end: float,
    h: float,
    tol: float,
) -> GeodesicVerdict:
    curve = integrate_geodesic(system, init, s_end, h)
    return check_curve_development(conn, curve, tol)


def lift_independence_residual(conn: GalileanConnection, curve: CurveSamples, A: np.ndarray) -> float:
    """Compare developments through the section A = I and a constant section A.

    The A-gauge development equals h^-1 ρ̃ h with h = (0, 0, 0, A), so it is
    moved back by h before projecting.
    """
    A = np.asarray(A, dtype=float)
    base = develop(conn, curve)
    gauged = develop(conn.in_gauge(A), curve)
    h = GalileanElement.from_parts(0.0, np.zeros(conn.n), np.zeros(conn.n), A)
    worst = 0.0
    for g_base, g_gauged in zip(base.elements, gauged.elements):
        aligned = project_to_model(compose(h, g_gauged)).as_array()
        worst = max(worst, float(np.max(np.abs(aligned - project_to_model(g_base).as_array()))))
    return worst
