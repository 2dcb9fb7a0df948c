"""Numerical verification of weighted Levin–Cochran–Lee and two-weight Hardy
inequalities on homogeneous groups."""

from .groups import DomainError, GroupSpec, Law, NormKind, QuasiNorm, ball_volume, dilate
from .quadrature import IntegralResult, IntegrationError, QuadratureConfig

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "GroupSpec",
    "IntegralResult",
    "IntegrationError",
    "Law",
    "NormKind",
    "QuadratureConfig",
    "QuasiNorm",
    "ball_volume",
    "dilate",
]
