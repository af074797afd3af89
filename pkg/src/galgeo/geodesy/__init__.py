from .curve import CurveSamples
from .development import (
    DevelopmentResult,
    check_curve_development,
    check_geodesic_development,
    develop,
    lift_independence_residual,
)
from .integrator import integrate_geodesic

__all__ = [
    "CurveSamples",
    "DevelopmentResult",
    "check_curve_development",
    "check_geodesic_development",
    "develop",
    "integrate_geodesic",
    "lift_independence_residual",
]
