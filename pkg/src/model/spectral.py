"""
RNStab 谱算子
附加质量算子与界面 Laplace 算子在正弦基 g_i(x) = sqrt(2/L) sin(iπx/L) 下的解析特征值，
以及用模态截断 n_modes = round(L/h) 模拟网格尺寸 h 的离散标度律
"""

import math
from dataclasses import dataclass, asdict
from typing import Dict, Any, List, Sequence, Tuple

import numpy as np

from .core import PhysicalParams, ParameterError


@dataclass(frozen=True)
class Mode:
    """单个界面正弦模态"""
    index: int
    mu: float   # 附加质量特征值 μ_i (cm)
    lam: float  # Laplace 特征值 λ_i (cm^-2)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_index(i: int) -> None:
    if int(i) != i or i < 1:
        raise ParameterError(f"invalid mode index: i={i}")


def added_mass_eigenvalue(i: int, L: float, R: float) -> float:
    """μ_i = L / (iπ tanh(iπR/L))"""
    _check_index(i)
    if not (L > 0 and R > 0):
        raise ParameterError(f"non-positive field: L={L}, R={R}")
    k = i * math.pi
    return L / (k * math.tanh(k * R / L))


def laplace_eigenvalue(i: int, L: float) -> float:
    """λ_i = (iπ/L)^2"""
    _check_index(i)
    if not L > 0:
        raise ParameterError(f"non-positive field: L={L}")
    k = i * math.pi / L
    return k * k


def truncation_from_h(L: float, h: float) -> int:
    """网格尺寸 h 对应的模态数 (四舍五入，至少 1)"""
    if not (0 < h < L):
        raise ParameterError(f"invalid mesh size: h={h} must lie in (0, L={L})")
    return max(1, int(math.floor(L / h + 0.5)))


def build_spectrum(p: PhysicalParams, n_modes: int) -> List[Mode]:
    """按序号排列的前 n_modes 个模态"""
    if n_modes < 1:
        raise ParameterError(f"zero modes: n_modes={n_modes}")
    return [
        Mode(
            index=i,
            mu=added_mass_eigenvalue(i, p.length, p.radius),
            lam=laplace_eigenvalue(i, p.length),
        )
        for i in range(1, n_modes + 1)
    ]


def spectrum_arrays(spectrum: Sequence[Mode]) -> Tuple[np.ndarray, np.ndarray]:
    """把模态列表转成 (mu, lam) 数组，供向量化计算"""
    mu = np.array([m.mu for m in spectrum], dtype=float)
    lam = np.array([m.lam for m in spectrum], dtype=float)
    return mu, lam


def spectrum_extremes(spectrum: Sequence[Mode]) -> Dict[str, float]:
    """截断谱的 μ_min、μ_max、λ_max"""
    mu, lam = spectrum_arrays(spectrum)
    return {
        "mu_min": float(mu.min()),
        "mu_max": float(mu.max()),
        "lambda_max": float(lam.max()),
    }


def scaling_exponents(L: float, R: float, h_values: Sequence[float]) -> Dict[str, float]:
    """μ_min、λ_max、μ_max 关于 h 的双对数斜率 (期望 1、-2、0)"""
    if len(h_values) < 2:
        raise ValueError("at least two mesh sizes are required")

    mu_min, lam_max, mu_max = [], [], []
    for h in h_values:
        n = truncation_from_h(L, h)
        mu_min.append(added_mass_eigenvalue(n, L, R))
        lam_max.append(laplace_eigenvalue(n, L))
        mu_max.append(added_mass_eigenvalue(1, L, R))

    log_h = np.log(np.asarray(h_values, dtype=float))
    return {
        "mu_min": float(np.polyfit(log_h, np.log(mu_min), 1)[0]),
        "lambda_max": float(np.polyfit(log_h, np.log(lam_max), 1)[0]),
        "mu_max": float(np.polyfit(log_h, np.log(mu_max), 1)[0]),
    }


__all__ = [
    "Mode",
    "added_mass_eigenvalue",
    "laplace_eigenvalue",
    "truncation_from_h",
    "build_spectrum",
    "spectrum_arrays",
    "spectrum_extremes",
    "scaling_exponents",
]
