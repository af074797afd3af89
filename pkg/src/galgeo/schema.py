# src/galgeo/schema.py
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator

from src.galgeo.config import settings


# ===== INPUT DOCUMENTS =====
class SystemFile(BaseModel):
    """A second-order system x'' + Gamma(t, x, x') = 0 with its normalization data.

    Expression strings use the chart grammar (t, x1..xn, y1..yn). D defaults
    to the zero matrix and Qsym to the zero tensor.
    """

    n: int = Field(..., ge=1)
    gamma: List[str]
    D: Optional[List[List[str]]] = None
    Qsym: Optional[List[List[List[str]]]] = None
    name: str = ""
    description: str = ""
    metadata: Dict[str, Any] = Field(default_factory=dict)

    _system: Any = PrivateAttr(default=None)
    _normalization: Any = PrivateAttr(default=None)

    @field_validator("n")
    @classmethod
    def _dimension_in_range(cls, value: int) -> int:
        if value > settings.max_dimension:
            raise ValueError(f"n must be at most {settings.max_dimension}, got {value}")
        return value

    @model_validator(mode="after")
    def _parse_expressions(self) -> "SystemFile":
        n = self.n
        if len(self.gamma) != n:
            raise ValueError(f"gamma must have {n} entries, got {len(self.gamma)}")
        if self.D is not None and (len(self.D) != n or any(len(row) != n for row in self.D)):
            raise ValueError(f"D must be an {n}x{n} matrix of expression strings")
        if self.Qsym is not None and (
            len(self.Qsym) != n or any(len(m) != n or any(len(row) != n for row in m) for m in self.Qsym)
        ):
            raise ValueError(f"Qsym must be an {n}x{n}x{n} tensor of expression strings")

        # parse errors and symmetry violations propagate as GalgeoError subclasses
        from src.galgeo.geometry.connection import NormalizationChoice, SecondOrderSystem

        self._system = SecondOrderSystem.from_strings(self.gamma, n, name=self.name)
        self._normalization = NormalizationChoice.from_strings(n, self.D, self.Qsym)
        return self

    @property
    def system(self):
        return self._system

    @property
    def normalization(self):
        return self._normalization


# ===== REPORTS =====
class PointError(BaseModel):
    point: List[float]
    error: str


class StraightLineVerdict(BaseModel):
    passed: bool
    max_violation: float
    max_contact: float
    max_dy: float
    min_dt: float
    samples: int


class StructureReport(BaseModel):
    """Max-reduced residuals of the structure equations over a point set."""

    tolerance: float
    points_checked: int
    points_failed: int = 0
    residuals: Dict[str, float] = Field(default_factory=dict)
    curvature_norm: float = 0.0
    errors: List[PointError] = Field(default_factory=list)
    passed: bool = False


class AppendixReport(BaseModel):
    tolerance: float
    points_checked: int
    residuals: Dict[str, float] = Field(default_factory=dict)
    # reported without a pass criterion
    info: Dict[str, float] = Field(default_factory=dict)
    errors: List[PointError] = Field(default_factory=list)
    passed: bool = False


class GeodesicVerdict(BaseModel):
    passed: bool
    status: str = "ok"
    message: str = ""
    samples: int
    truncated: bool = False
    straight_line: Optional[StraightLineVerdict] = None
    max_omega_pullback: float = 0.0
    max_phi_pullback: float = 0.0
    final_point: List[float] = Field(default_factory=list)
