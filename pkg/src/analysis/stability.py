"""
RNStab 稳定性分析
不稳定充分条件 ρ_s H_s < max γ_i、χ(-1) 判据、阈值 η̄/η₁/α₁/η₂/α₂、
按谱半径分类以及临界时间步长的二分搜索
"""

import math
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Any, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..config.settings import settings
from ..model.core import PhysicalParams, ParameterError, stiffness
from ..model.spectral import Mode, spectrum_arrays, spectrum_extremes
from .polynomials import shifted_roots_batch


class Classification(str, Enum):
    """稳定性分类"""
    STABLE = "stable"
    MARGINAL = "marginal"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class InstabilityCheck:
    """不稳定充分条件的结果"""
    flag: bool
    gamma_max: float
    worst_mode: int

    def __iter__(self):
        return iter((self.flag, self.gamma_max, self.worst_mode))


@dataclass(frozen=True)
class Thresholds:
    """参数阈值；不适用的 α 阈值为 None"""
    eta_bar: Optional[float]
    eta_1: float
    alpha_1: Optional[float]
    eta_2: float
    alpha_2: Optional[float]
    structure_mass: float
    alpha: Optional[float] = None

    @property
    def alpha_1_applicable(self) -> bool:
        return self.alpha_1 is not None

    @property
    def alpha_2_applicable(self) -> bool:
        return self.alpha_2 is not None

    @property
    def condition_i(self) -> Optional[bool]:
        """ρ_s H_s < η̄ (需要给定 α)"""
        if self.eta_bar is None:
            return None
        return self.structure_mass < self.eta_bar

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["alpha_1_applicable"] = self.alpha_1_applicable
        data["alpha_2_applicable"] = self.alpha_2_applicable
        data["condition_i"] = self.condition_i
        return data


@dataclass(frozen=True)
class StabilityVerdict:
    """单个参数点的稳定性结论"""
    per_mode_radius: Tuple[float, ...]
    worst_mode: int
    classification: Classification
    gamma_max: float
    instability_sufficient: bool
    gamma_worst_mode: int

    @property
    def spectral_radius(self) -> float:
        return max(self.per_mode_radius)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_mode_radius": list(self.per_mode_radius),
            "worst_mode": self.worst_mode,
            "classification": self.classification.value,
            "spectral_radius": self.spectral_radius,
            "gamma_max": self.gamma_max,
            "instability_sufficient": self.instability_sufficient,
            "gamma_worst_mode": self.gamma_worst_mode,
        }


@dataclass(frozen=True)
class CriticalStep:
    """临界时间步长搜索结果"""
    found: bool
    dt_star: Optional[float]
    lower: float  # 稳定端
    upper: float  # 不稳定端
    iterations: int
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_alpha(alpha: float, strict: bool = True) -> None:
    if strict and not alpha > 0:
        raise ParameterError(f"non-positive alpha: alpha={alpha}")
    if alpha < 0:
        raise ParameterError(f"negative alpha: alpha={alpha}")


def gamma(p: PhysicalParams, mode: Mode, alpha: float, dt: float) -> float:
    """γ_i = αΔt(4ρ_fμ_i + Δt²(β+ψλ_i)) / (16ρ_fμ_i + 4αΔt)"""
    m_f = p.rho_f * mode.mu
    return alpha * dt * (4.0 * m_f + dt * dt * stiffness(p, mode)) / (16.0 * m_f + 4.0 * alpha * dt)


def gamma_values(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float, dt: float) -> np.ndarray:
    mu, lam = spectrum_arrays(spectrum)
    m_f = p.rho_f * mu
    K = p.beta + p.psi * lam
    return alpha * dt * (4.0 * m_f + dt * dt * K) / (16.0 * m_f + 4.0 * alpha * dt)


def chi_at_minus_one(p: PhysicalParams, mode: Mode, alpha: float, dt: float) -> float:
    """χ(-1) = (α/(ρ_fμ_iΔt))(4ρ_sH_s − 4ρ_fμ_i − Δt²(β+ψλ_i)) + 16ρ_sH_s/Δt²"""
    _check_alpha(alpha)
    m_s = p.structure_mass
    m_f = p.rho_f * mode.mu
    return (alpha / (m_f * dt)) * (4.0 * m_s - 4.0 * m_f - dt * dt * stiffness(p, mode)) \
        + 16.0 * m_s / (dt * dt)


def instability_sufficient(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float,
                           dt: float) -> InstabilityCheck:
    """ρ_s H_s < max_i γ_i 时格式不稳定"""
    _check_alpha(alpha)
    values = gamma_values(p, spectrum, alpha, dt)
    k = int(np.argmax(values))
    gamma_max = float(values[k])
    return InstabilityCheck(
        flag=p.structure_mass < gamma_max,
        gamma_max=gamma_max,
        worst_mode=spectrum[k].index,
    )


def thresholds(p: PhysicalParams, spectrum: Sequence[Mode], dt: float,
               alpha: Optional[float] = None) -> Thresholds:
    """三组阈值：η̄ 取 μ_min 与 λ_max 配对；(η₁, α₁) 来自 η̄ 关于 α 的反解；(η₂, α₂) 取 i = 1"""
    m_s = p.structure_mass
    ext = spectrum_extremes(spectrum)
    m_f_min = p.rho_f * ext["mu_min"]
    m_f_1 = p.rho_f * spectrum[0].mu
    K_max = p.beta + p.psi * ext["lambda_max"]

    eta_bar = None
    if alpha is not None:
        _check_alpha(alpha, strict=False)
        eta_bar = alpha * dt * (4.0 * m_f_min + dt * dt * K_max) / (16.0 * m_f_min + 4.0 * alpha * dt)

    eta_1 = m_f_min + dt * dt * K_max / 4.0
    alpha_1 = None
    if m_s < eta_1:
        alpha_1 = 16.0 * m_f_min * m_s / (dt * (4.0 * m_f_min + dt * dt * K_max - 4.0 * m_s))

    eta_2 = m_f_1
    alpha_2 = None
    if m_s < eta_2:
        alpha_2 = 4.0 * m_f_1 * m_s / (dt * (m_f_1 - m_s))

    return Thresholds(
        eta_bar=eta_bar,
        eta_1=eta_1,
        alpha_1=alpha_1,
        eta_2=eta_2,
        alpha_2=alpha_2,
        structure_mass=m_s,
        alpha=alpha,
    )


def dt_instability_bound(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float) -> Optional[float]:
    """ρ_sH_s < ρ_fμ₁ 时，Δt 超过 4ρ_fμ₁ρ_sH_s/(α(ρ_fμ₁ − ρ_sH_s)) 即不稳定"""
    _check_alpha(alpha)
    m_s = p.structure_mass
    m_f_1 = p.rho_f * spectrum[0].mu
    if m_s >= m_f_1:
        return None
    return 4.0 * m_f_1 * m_s / (alpha * (m_f_1 - m_s))


def alpha1_joint_limit(p: PhysicalParams, ratio: float) -> Optional[float]:
    """Δt = ratio·h、h → 0 时截断谱下 α₁ 的极限 (μ_min ≈ h/π，λ_max ≈ π²/h²)"""
    m_s = p.structure_mass
    denominator = math.pi * ratio * (ratio * ratio * math.pi ** 2 * p.psi - 4.0 * m_s)
    if denominator <= 0:
        return None
    return 16.0 * p.rho_f * m_s / denominator


def nominal_joint_limit(p: PhysicalParams) -> Optional[float]:
    """单位常数下的极限 16ρ_sH_sρ_f/(ψ + 4ρ_f − 4ρ_sH_s)"""
    m_s = p.structure_mass
    denominator = p.psi + 4.0 * p.rho_f - 4.0 * m_s
    if denominator <= 0:
        return None
    return 16.0 * m_s * p.rho_f / denominator


def classify_radius(radius: float, margin: Optional[float] = None) -> Classification:
    if margin is None:
        margin = settings.stability_margin
    if radius < 1.0 - margin:
        return Classification.STABLE
    if radius > 1.0 + margin:
        return Classification.UNSTABLE
    return Classification.MARGINAL


def mode_radii(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float, dt: float) -> np.ndarray:
    """各模态 χ 的谱半径；α = 0 时为四重根 1"""
    _check_alpha(alpha, strict=False)
    if alpha == 0:
        return np.ones(len(spectrum))

    mu, lam = spectrum_arrays(spectrum)
    m_f = p.rho_f * mu
    A = np.full_like(mu, alpha / p.structure_mass)
    B = alpha / m_f
    C = (p.beta + p.psi * lam) / m_f
    u_roots = shifted_roots_batch(A, B, C, dt)
    return np.max(1.0 / np.abs(1.0 + u_roots), axis=1)


def classify(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float, dt: float,
             margin: Optional[float] = None) -> StabilityVerdict:
    """按谱半径对参数点分类，并附上不稳定充分条件"""
    radii = mode_radii(p, spectrum, alpha, dt)
    k = int(np.argmax(radii))
    radius = float(radii[k])

    if alpha > 0:
        flag, gamma_max, gamma_mode = instability_sufficient(p, spectrum, alpha, dt)
    else:
        flag, gamma_max, gamma_mode = False, 0.0, spectrum[0].index

    verdict = StabilityVerdict(
        per_mode_radius=tuple(float(r) for r in radii),
        worst_mode=spectrum[k].index,
        classification=classify_radius(radius, margin),
        gamma_max=gamma_max,
        instability_sufficient=flag,
        gamma_worst_mode=gamma_mode,
    )

    if flag and verdict.classification is not Classification.UNSTABLE:
        logger.warning(
            f"Sufficient instability condition holds but radius={radius:.17g} "
            f"(alpha={alpha}, dt={dt})"
        )
    return verdict


def critical_dt(p: PhysicalParams, spectrum: Sequence[Mode], alpha: float,
                tol: Optional[float] = None,
                bracket: Optional[Tuple[float, float]] = None) -> CriticalStep:
    """在对数尺度上二分 Δt，直到 upper/lower - 1 < tol"""
    _check_alpha(alpha)
    tol = settings.critical_dt_tol if tol is None else tol
    lower, upper = bracket if bracket is not None else settings.critical_dt_bracket

    def is_stable(dt: float) -> bool:
        return classify(p, spectrum, alpha, dt).classification is Classification.STABLE

    if not (is_stable(lower) and not is_stable(upper)):
        logger.warning(f"No stable/unstable bracket for alpha={alpha} on [{lower}, {upper}]")
        return CriticalStep(
            found=False,
            dt_star=None,
            lower=lower,
            upper=upper,
            iterations=0,
            message="monotonicity not found",
        )

    iterations = 0
    while upper / lower - 1.0 > tol:
        mid = math.sqrt(lower * upper)
        if is_stable(mid):
            lower = mid
        else:
            upper = mid
        iterations += 1

    logger.debug(f"Critical step for alpha={alpha}: [{lower:.6g}, {upper:.6g}] after {iterations} bisections")
    return CriticalStep(
        found=True,
        dt_star=math.sqrt(lower * upper),
        lower=lower,
        upper=upper,
        iterations=iterations,
        message="ok",
    )


__all__ = [
    "Classification",
    "InstabilityCheck",
    "Thresholds",
    "StabilityVerdict",
    "CriticalStep",
    "gamma",
    "gamma_values",
    "chi_at_minus_one",
    "instability_sufficient",
    "thresholds",
    "dt_instability_bound",
    "alpha1_joint_limit",
    "nominal_joint_limit",
    "classify_radius",
    "mode_radii",
    "classify",
    "critical_dt",
]
