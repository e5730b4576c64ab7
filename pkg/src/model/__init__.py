"""
RNStab 模型模块
物理参数、离散参数与模态谱
"""

from .core import (
    ParameterError,
    PhysicalParams,
    Discretization,
    ReducedGroups,
    validate_params,
    stiffness,
    reduced_groups,
)
from .spectral import (
    Mode,
    added_mass_eigenvalue,
    laplace_eigenvalue,
    truncation_from_h,
    build_spectrum,
)

__all__ = [
    "ParameterError",
    "PhysicalParams",
    "Discretization",
    "ReducedGroups",
    "validate_params",
    "stiffness",
    "reduced_groups",
    "Mode",
    "added_mass_eigenvalue",
    "laplace_eigenvalue",
    "truncation_from_h",
    "build_spectrum",
]
