"""
RNStab 模型核心
物理参数、离散参数的定义与校验，以及稳定性分析使用的约化参数组 A、B、C
"""

from dataclasses import dataclass, asdict, fields
from typing import Dict, Any, Tuple, TYPE_CHECKING

if TYPE_CHECKING:
    from .spectral import Mode


class ParameterError(ValueError):
    """参数不满足不变量时抛出，消息以被违反的不变量名称开头"""


@dataclass(frozen=True)
class PhysicalParams:
    """流体/结构物理参数 (CGS 单位制)"""
    rho_f: float   # 流体密度 g/cm^3
    rho_s: float   # 结构密度 g/cm^3
    h_s: float     # 结构厚度 cm
    beta: float    # 零阶弹性系数 dyne/cm^3
    psi: float     # 二阶弹性系数 dyne/cm
    radius: float  # 管道半径 cm
    length: float  # 管道长度 cm

    @property
    def structure_mass(self) -> float:
        """单位面积结构质量 ρ_s H_s"""
        return self.rho_s * self.h_s

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Discretization:
    """时间离散与模态截断"""
    dt: float
    n_modes: int
    n_steps: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ReducedGroups:
    """约化参数组: A = α/(ρ_s H_s), B = α/(ρ_f μ_i), C = (β + ψ λ_i)/(ρ_f μ_i)"""
    A: float
    B: float
    C: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def validate_params(
    p: PhysicalParams,
    d: Discretization
) -> Tuple[PhysicalParams, Discretization]:
    """校验参数，全部满足时原样返回"""
    for field in fields(p):
        value = getattr(p, field.name)
        if not value > 0:
            raise ParameterError(f"non-positive field: {field.name}={value}")

    if not d.dt > 0:
        raise ParameterError(f"non-positive field: dt={d.dt}")
    if d.n_modes < 1:
        raise ParameterError(f"zero modes: n_modes={d.n_modes}")
    if d.n_steps < 1:
        raise ParameterError(f"zero steps: n_steps={d.n_steps}")

    return p, d


def stiffness(p: PhysicalParams, mode: "Mode") -> float:
    """模态刚度 β + ψ λ_i"""
    return p.beta + p.psi * mode.lam


def reduced_groups(p: PhysicalParams, alpha: float, mode: "Mode") -> ReducedGroups:
    """计算模态 i 的约化参数组"""
    if not alpha > 0:
        # α = 0 走退化分支，不经过约化参数组
        raise ParameterError(f"non-positive alpha: alpha={alpha}")

    fluid_mass = p.rho_f * mode.mu
    return ReducedGroups(
        A=alpha / p.structure_mass,
        B=alpha / fluid_mass,
        C=stiffness(p, mode) / fluid_mass,
    )


__all__ = [
    "ParameterError",
    "PhysicalParams",
    "Discretization",
    "ReducedGroups",
    "validate_params",
    "stiffness",
    "reduced_groups",
]
