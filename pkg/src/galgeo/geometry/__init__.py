from .connection import (
    CurvatureForms,
    CurvatureInvariants,
    GalileanConnection,
    NormalizationChoice,
    SecondOrderSystem,
    build_connection,
    chern_connection,
    curvature,
    extract_invariants,
    gauge_transform,
    verify_structure_equations,
)
from .forms import AdaptedTwoForm, DifferentialForm, TangentVector, to_adapted_basis
from .model import GalileanAlgebraElement, GalileanElement, ModelPoint

__all__ = [
    "AdaptedTwoForm",
    "CurvatureForms",
    "CurvatureInvariants",
    "DifferentialForm",
    "GalileanAlgebraElement",
    "GalileanConnection",
    "GalileanElement",
    "ModelPoint",
    "NormalizationChoice",
    "SecondOrderSystem",
    "TangentVector",
    "build_connection",
    "chern_connection",
    "curvature",
    "extract_invariants",
    "gauge_transform",
    "to_adapted_basis",
    "verify_structure_equations",
]
