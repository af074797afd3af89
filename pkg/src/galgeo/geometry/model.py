# src/galgeo/geometry/model.py
"""The flat model: the matrix group Gal_n, its Lie algebra and J^1(R, R^n).

Group elements are (n+2)x(n+2) matrices with rows/columns ordered
(1, t-slot, x-slots):

    [ 1  0  0 ]
    [ t  1  0 ]
    [ x  y  A ]
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.galgeo.base import InvariantDriftError, SingularMatrixError
from src.galgeo.config import settings
from src.galgeo.schema import StraightLineVerdict

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


def checked_inverse(A: np.ndarray, condition_limit: Optional[float] = None) -> np.ndarray:
    """Inverse of a square block, refusing numerically singular input."""
    condition_limit = settings.condition_limit if condition_limit is None else condition_limit
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return A.copy()
    condition = np.linalg.cond(A)
    if not np.isfinite(condition) or condition > condition_limit:
        raise SingularMatrixError(f"matrix is numerically singular (condition {condition:.3e})")
    return np.linalg.inv(A)


# ============================================================================
# MODEL SPACE
# ============================================================================
@dataclass(frozen=True)
class ModelPoint:
    """A point (t, x, y) of J^1(R, R^n)."""

    t: float
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have equal length")
        if not all(math.isfinite(v) for v in (self.t, *self.x, *self.y)):
            raise ValueError("ModelPoint entries must be finite")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def origin(cls, n: int) -> "ModelPoint":
        return cls(0.0, (0.0,) * n, (0.0,) * n)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x, *self.y], dtype=float)


# ============================================================================
# GROUP
# ============================================================================
@dataclass(frozen=True, eq=False)
class GalileanElement:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 3:
            raise ValueError(f"expected an (n+2)x(n+2) matrix, got shape {m.shape}")
        if m[0, 0] != 1.0 or np.any(m[0, 1:] != 0.0):
            raise ValueError("first row must be (1, 0, ..., 0)")
        if m[1, 1] != 1.0 or np.any(m[1, 2:] != 0.0):
            raise ValueError("second row must be (t, 1, 0, ..., 0)")
        object.__setattr__(self, "matrix", _frozen(m))

    # ---------- construction ----------
    @classmethod
    def from_parts(cls, t: float, x: Sequence[float], y: Sequence[float], A: np.ndarray) -> "GalileanElement":
        x = np.asarray(x, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        n = x.shape[0]
        A = np.asarray(A, dtype=float).reshape(n, n)
        m = np.zeros((n + 2, n + 2))
        m[0, 0] = 1.0
        m[1, 0] = t
        m[1, 1] = 1.0
        m[2:, 0] = x
        m[2:, 1] = y
        m[2:, 2:] = A
        return cls(m)

    @classmethod
    def identity(cls, n: int) -> "GalileanElement":
        return cls(np.eye(n + 2))

    @classmethod
    def snap(cls, matrix: np.ndarray, drift_limit: Optional[float] = None) -> "GalileanElement":
        """Re-assert the fixed entries of an integrated matrix.

        Raises InvariantDriftError when they moved by more than `drift_limit`.
        """
        drift_limit = settings.drift_limit if drift_limit is None else drift_limit
        m = np.array(matrix, dtype=float)
        expected = np.zeros(m.shape[1] - 1)
        expected[0] = 1.0
        drift = max(
            abs(m[0, 0] - 1.0),
            float(np.max(np.abs(m[0, 1:]))),
            float(np.max(np.abs(m[1, 1:] - expected))),
        )
        if not np.all(np.isfinite(m)) or drift > drift_limit:
            raise InvariantDriftError(f"group block structure drifted by {drift:.3e}")
        m[0, :] = 0.0
        m[0, 0] = 1.0
        m[1, 1:] = expected
        return cls(m)

    # ---------- blocks ----------
    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 2

    @property
    def t(self) -> float:
        return float(self.matrix[1, 0])

    @property
    def x(self) -> np.ndarray:
        return self.matrix[2:, 0].copy()

    @property
    def y(self) -> np.ndarray:
        return self.matrix[2:, 1].copy()

    @property
    def A(self) -> np.ndarray:
        return self.matrix[2:, 2:].copy()

    def compose(self, other: "GalileanElement") -> "GalileanElement":
        return compose(self, other)

    def inverse(self) -> "GalileanElement":
        return inverse(self)

    def __matmul__(self, other: "GalileanElement") -> "GalileanElement":
        return compose(self, other)


# ============================================================================
# LIE ALGEBRA
# ============================================================================
@dataclass(frozen=True, eq=False)
class GalileanAlgebraElement:
    """(a_t, a_x, a_y, a_A) laid out like a group element with zero diagonal blocks."""

    t: float
    x: np.ndarray
    y: np.ndarray
    A: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).reshape(-1)
        n = x.shape[0]
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(np.asarray(self.y, dtype=float).reshape(n)))
        object.__setattr__(self, "A", _frozen(np.asarray(self.A, dtype=float).reshape(n, n)))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @classmethod
    def zero(cls, n: int) -> "GalileanAlgebraElement":
        return cls(0.0, np.zeros(n), np.zeros(n), np.zeros((n, n)))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "GalileanAlgebraElement":
        m = np.asarray(matrix, dtype=float)
        if np.any(m[0, :] != 0.0) or np.any(m[1, 1:] != 0.0):
            raise ValueError("matrix does not have the Lie algebra block pattern")
        return cls(m[1, 0], m[2:, 0], m[2:, 1], m[2:, 2:])

    @property
    def matrix(self) -> np.ndarray:
        n = self.n
        m = np.zeros((n + 2, n + 2))
        m[1, 0] = self.t
        m[2:, 0] = self.x
        m[2:, 1] = self.y
        m[2:, 2:] = self.A
        return m

    def bracket(self, other: "GalileanAlgebraElement") -> "GalileanAlgebraElement":
        return bracket(self, other)


# ============================================================================
# MODULE API
# ============================================================================
def identity(n: int) -> GalileanElement:
    return GalileanElement.identity(n)


def compose(g: GalileanElement, h: GalileanElement) -> GalileanElement:
    if g.n != h.n:
        raise ValueError(f"cannot compose elements of Gal_{g.n} and Gal_{h.n}")
    return GalileanElement(g.matrix @ h.matrix)


def inverse(g: GalileanElement) -> GalileanElement:
    """(t, x, y, A)^-1 = (-t, -A^-1 (x - y t), -A^-1 y, A^-1)."""
    A_inv = checked_inverse(g.A)
    return GalileanElement.from_parts(-g.t, -A_inv @ (g.x - g.y * g.t), -A_inv @ g.y, A_inv)


def maurer_cartan(g: GalileanElement, gdot: np.ndarray) -> GalileanAlgebraElement:
    """g^-1 gdot, i.e. (dt, A^-1 (dx - y dt), A^-1 dy, A^-1 dA)."""
    gdot = np.asarray(gdot, dtype=float)
    if gdot.shape != g.matrix.shape:
        raise ValueError(f"tangent has shape {gdot.shape}, expected {g.matrix.shape}")
    return GalileanAlgebraElement.from_matrix(inverse(g).matrix @ gdot)


def bracket(a: GalileanAlgebraElement, b: GalileanAlgebraElement) -> GalileanAlgebraElement:
    return GalileanAlgebraElement.from_matrix(a.matrix @ b.matrix - b.matrix @ a.matrix)


def project_to_model(g: GalileanElement) -> ModelPoint:
    return ModelPoint(g.t, tuple(g.x), tuple(g.y))


def act_on_model(g: GalileanElement, point: ModelPoint) -> ModelPoint:
    """Left action on J^1 through the A = I coset representative."""
    representative = GalileanElement.from_parts(point.t, point.x, point.y, np.eye(point.n))
    return project_to_model(compose(g, representative))


def is_straight_line(samples: Sequence[Tuple[float, ModelPoint]], tol: float) -> StraightLineVerdict:
    """Pullback test for x - y t = const, y = const with dt != 0.

    Checks every consecutive pair: |dx - y_mid dt| <= tol (1 + |dt|),
    |dy| <= tol and |dt| >= tol.
    """
    if len(samples) < 3:
        raise ValueError(f"a straight-line test needs at least 3 samples, got {len(samples)}")
    s = np.array([item[0] for item in samples], dtype=float)
    if np.any(np.diff(s) <= 0.0):
        raise ValueError("sample parameters must be strictly increasing")
    t = np.array([item[1].t for item in samples])
    x = np.array([item[1].x for item in samples])
    y = np.array([item[1].y for item in samples])

    dt = np.diff(t)
    dx = np.diff(x, axis=0)
    dy = np.diff(y, axis=0)
    y_mid = 0.5 * (y[1:] + y[:-1])

    contact = np.max(np.abs(dx - y_mid * dt[:, None]), axis=1) / (1.0 + np.abs(dt))
    max_contact = float(np.max(contact)) if contact.size else 0.0
    max_dy = float(np.max(np.abs(dy))) if dy.size else 0.0
    min_dt = float(np.min(np.abs(dt)))

    passed = max_contact <= tol and max_dy <= tol and min_dt >= tol
    return StraightLineVerdict(
        passed=passed,
        max_violation=max(max_contact, max_dy),
        max_contact=max_contact,
        max_dy=max_dy,
        min_dt=min_dt,
        samples=len(samples),
    )


# ---------- prolongation ----------
def prolong(t: Sequence[float], x: np.ndarray) -> List[ModelPoint]:
    """First-jet samples (t, x(t), dx/dt) of a sampled curve x(t)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if t.shape[0] < 3 or x.shape[0] != t.shape[0]:
        raise ValueError("prolongation needs at least 3 aligned samples")
    y = np.gradient(x, t, axis=0, edge_order=2)
    return [ModelPoint(t[k], tuple(x[k]), tuple(y[k])) for k in range(t.shape[0])]


def is_contact_integral(points: Sequence[ModelPoint], tol: float) -> Tuple[bool, float]:
    """Whether the samples annihilate the contact forms dx - y dt."""
    if len(points) < 2:
        raise ValueError("need at least 2 samples")
    t = np.array([p.t for p in points])
    x = np.array([p.x for p in points])
    y = np.array([p.y for p in points])
    dt = np.diff(t)
    residual = np.max(np.abs(np.diff(x, axis=0) - 0.5 * (y[1:] + y[:-1]) * dt[:, None]), axis=1) / (1.0 + np.abs(dt))
    worst = float(np.max(residual))
    return worst <= tol, worst
