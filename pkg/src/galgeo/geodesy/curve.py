# src/galgeo/geodesy/curve.py
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.galgeo.geometry.connection import SecondOrderSystem
from src.galgeo.symbolic.expr import ChartPoint

logger = logging.getLogger(__name__)

UNIFORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CurveSamples:
    """Uniformly spaced samples (s_k, σ(s_k)) of a curve in the chart.

    `tangents` hold dσ/ds at the samples. A curve produced by the geodesic
    integrator also carries its `spray`, so tangents can be re-evaluated
    at any interpolated point from the equations themselves.
    """

    n: int
    s: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    spray: Optional[SecondOrderSystem] = None
    truncated: bool = False
    status: str = "ok"
    message: str = ""

    def __post_init__(self) -> None:
        dim = 2 * self.n + 1
        s = np.asarray(self.s, dtype=float).reshape(-1)
        points = np.asarray(self.points, dtype=float).reshape(-1, dim)
        tangents = np.asarray(self.tangents, dtype=float).reshape(-1, dim)
        if s.shape[0] == 0 or points.shape[0] != s.shape[0] or tangents.shape[0] != s.shape[0]:
            raise ValueError("parameters, points and tangents must be non-empty and aligned")
        if s.shape[0] > 1:
            steps = np.diff(s)
            if np.any(steps <= 0.0):
                raise ValueError("sample parameters must be strictly increasing")
            scale = max(1.0, float(np.max(np.abs(s))))
            if np.max(np.abs(steps - steps[0])) > UNIFORM_TOLERANCE * scale:
                raise ValueError("samples must be uniformly spaced")
        for name, value in (("s", s), ("points", points), ("tangents", tangents)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    # ---------- construction ----------
    @classmethod
    def from_parametrization(
        cls,
        n: int,
        s: Sequence[float],
        position: Callable[[float], Sequence[float]],
        velocity: Callable[[float], Sequence[float]],
    ) -> "CurveSamples":
        """Sample a curve s -> (t, x, y) given its derivative."""
        s = np.asarray(s, dtype=float)
        points = np.array([position(value) for value in s], dtype=float)
        tangents = np.array([velocity(value) for value in s], dtype=float)
        return cls(n, s, points, tangents)

    # ---------- accessors ----------
    def __len__(self) -> int:
        return self.s.shape[0]

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0]) if len(self) > 1 else 0.0

    def point(self, k: int) -> ChartPoint:
        return ChartPoint.from_array(self.points[k], self.n)

    def chart_points(self) -> List[ChartPoint]:
        return [self.point(k) for k in range(len(self))]

    def samples(self) -> List[Tuple[float, ChartPoint]]:
        return [(float(self.s[k]), self.point(k)) for k in range(len(self))]

    def tangent_at(self, values: np.ndarray, fallback: np.ndarray) -> np.ndarray:
        """Spray tangent at `values` when available, otherwise `fallback`."""
        if self.spray is None:
            return fallback
        return self.spray.spray(ChartPoint.from_array(values, self.n))


# ---------- interpolation / differentiation ----------
def hermite_midpoint(p0: np.ndarray, v0: np.ndarray, p1: np.ndarray, v1: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Value and derivative of the cubic Hermite interpolant at the midpoint."""
    value = 0.5 * (p0 + p1) + 0.125 * h * (v0 - v1)
    derivative = 1.5 * (p1 - p0) / h - 0.25 * (v0 + v1)
    return value, derivative


def five_point_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference on interior samples 2..m-3."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 5:
        raise ValueError("a five-point derivative needs at least 5 samples")
    return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
