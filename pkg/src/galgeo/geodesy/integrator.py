# src/galgeo/geodesy/integrator.py
import logging
import math
from typing import Optional, Tuple

import numpy as np

from src.galgeo.base import EvaluationDomainError
from src.galgeo.config import settings
from src.galgeo.geodesy.curve import CurveSamples
from src.galgeo.geometry.connection import SecondOrderSystem
from src.galgeo.symbolic.expr import ChartPoint

logger = logging.getLogger(__name__)


class _Truncation(Exception):
    def __init__(self, status: str, message: str) -> None:
        self.status = status
        self.message = message
        super().__init__(message)


def _acceleration(system: SecondOrderSystem, t: float, x: np.ndarray, y: np.ndarray, threshold: float) -> np.ndarray:
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise _Truncation("blowup", f"non-finite state at t={t!r}")
    if max(float(np.max(np.abs(x))), float(np.max(np.abs(y)))) > threshold:
        raise _Truncation("blowup", f"state exceeded {threshold:g} at t={t!r}")
    try:
        return -system.evaluate(ChartPoint(t, tuple(x), tuple(y)))
    except EvaluationDomainError as exc:
        raise _Truncation("domain_error", f"{exc} at t={t!r}") from None


def _rk4_step(
    system: SecondOrderSystem, t: float, x: np.ndarray, y: np.ndarray, a: np.ndarray, h: float, threshold: float
) -> Tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step of x' = y, y' = -Γ(t, x, y); `a` is the acceleration at (t, x, y)."""
    k1x, k1y = y, a
    k2x = y + 0.5 * h * k1y
    k2y = _acceleration(system, t + 0.5 * h, x + 0.5 * h * k1x, k2x, threshold)
    k3x = y + 0.5 * h * k2y
    k3y = _acceleration(system, t + 0.5 * h, x + 0.5 * h * k2x, k3x, threshold)
    k4x = y + h * k3y
    k4y = _acceleration(system, t + h, x + h * k3x, k4x, threshold)
    x_new = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y_new = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    return x_new, y_new


def integrate_geodesic(
    system: SecondOrderSystem,
    init: ChartPoint,
    s_end: float,
    h: float,
    blowup_threshold: Optional[float] = None,
) -> CurveSamples:
    """Geodesic through `init` parametrised by t, sampled up to t = s_end.

    The interval is split into ceil((s_end - t0) / h) equal steps, so the
    effective step never exceeds h and the last sample lands on s_end.
    A domain error or blow-up truncates the curve at the last good sample.
    """
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    if init.n != system.n:
        raise ValueError(f"initial point has n={init.n}, system has n={system.n}")
    if s_end < init.t:
        raise ValueError(f"end {s_end} lies before the initial time {init.t}")
    threshold = settings.blowup_threshold if blowup_threshold is None else blowup_threshold

    steps = max(0, math.ceil((s_end - init.t) / h - 1e-9))
    s = np.linspace(init.t, s_end, steps + 1) if steps else np.array([init.t])
    n = system.n

    x = np.array(init.x, dtype=float)
    y = np.array(init.y, dtype=float)
    points = [init.as_array()]
    tangents = []
    status, message = "ok", ""
    try:
        a = _acceleration(system, init.t, x, y, threshold)
    except _Truncation as exc:
        raise EvaluationDomainError(exc.message) from None

    for k in range(steps):
        t, step = s[k], s[k + 1] - s[k]
        tangents.append(np.concatenate([[1.0], y, a]))
        try:
            x, y = _rk4_step(system, t, x, y, a, step, threshold)
            a = _acceleration(system, s[k + 1], x, y, threshold)
        except _Truncation as exc:
            status, message = exc.status, exc.message
            logger.warning("geodesic truncated after %d of %d steps: %s", k, steps, message)
            break
        points.append(np.concatenate([[s[k + 1]], x, y]))
    else:
        tangents.append(np.concatenate([[1.0], y, a]))

    count = len(points)
    return CurveSamples(
        n,
        s[:count],
        np.array(points),
        np.array(tangents[:count]),
        spray=system,
        truncated=status != "ok",
        status=status,
        message=message,
    )
