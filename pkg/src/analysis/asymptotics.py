"""
RNStab 小步长渐近分析
P(1+U) = U^4 + AzU^3 + (A+B)zU^2 + ACz^3 U + ACz^3 的两对共轭根 U = u ± iv 的首阶展开，
实部满足的六次方程，以及用 Richardson 斜率检验展开阶数
"""

import math
from dataclasses import dataclass, asdict
from typing import Dict, Any, List, Sequence, Tuple

import numpy as np

from ..model.core import ReducedGroups
from .polynomials import quartic_roots, shifted_P


@dataclass(frozen=True)
class AsymptoticPrediction:
    """两对根的 (u, v²) 与 |1+U|²；第 1 对 |U| ~ z^(1/2)，第 2 对 |U| ~ z"""
    u1: float
    v1_sq: float
    u2: float
    v2_sq: float
    modulus1_sq: float
    modulus2_sq: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SexticCoefficients:
    """u 的六次方程系数 T6..T0 (降幂)"""
    T: Tuple[float, float, float, float, float, float, float]

    def __post_init__(self):
        if len(self.T) != 7 or self.T[0] != -64.0:
            raise ValueError("sextic must have 7 coefficients with T6 = -64")

    def evaluate(self, u: float) -> float:
        return float(np.polyval(self.T, u))

    def scale(self, u: float) -> float:
        """残差的量级参考 Σ|T_k||u|^k"""
        return float(sum(abs(t) * abs(u) ** k for k, t in enumerate(reversed(self.T))))


def root_asymptotics(g: ReducedGroups, z: float) -> AsymptoticPrediction:
    """首阶预测：u₁ = −Az/2，v₁² = (A+B)z，u₂ = −ACBz²/(2(A+B)²)，v₂² = CAz²/(A+B)"""
    if not z > 0:
        raise ValueError(f"z must be positive, got {z}")
    A, B, C = g.A, g.B, g.C
    S = A + B
    return AsymptoticPrediction(
        u1=-A * z / 2.0,
        v1_sq=S * z,
        u2=-A * C * B * z * z / (2.0 * S * S),
        v2_sq=C * A * z * z / S,
        modulus1_sq=1.0 + B * z,
        modulus2_sq=1.0 + C * A * A * z * z / (S * S),
    )


def sextic_coefficients(g: ReducedGroups, z: float) -> SexticCoefficients:
    """由实部方程消去 v² 得到的六次方程"""
    A, B, C = g.A, g.B, g.C
    S = A + B
    return SexticCoefficients(T=(
        -64.0,
        -96.0 * A * z,
        -32.0 * S * z - 48.0 * A * A * z ** 2,
        -32.0 * A * S * z ** 2 - 8.0 * A ** 3 * z ** 3,
        -4.0 * S * S * z ** 2 - 8.0 * A * A * S * z ** 3 + 16.0 * A * C * z ** 3 - 4.0 * A * A * C * z ** 4,
        -2.0 * A * S * S * z ** 3 + 8.0 * A * A * C * z ** 4 - 2.0 * A ** 3 * C * z ** 5,
        -A * A * C * (B - z * C) * z ** 5,
    ))


def v_squared(g: ReducedGroups, z: float, u: float) -> float:
    """虚部方程 v ≠ 0 分支：v² = (4u³ + 3Azu² + 2(A+B)zu + ACz³)/(4u + Az)"""
    A, B, C = g.A, g.B, g.C
    numerator = 4.0 * u ** 3 + 3.0 * A * z * u * u + 2.0 * (A + B) * z * u + A * C * z ** 3
    return numerator / (4.0 * u + A * z)


def root_pairs(g: ReducedGroups, z: float) -> List[complex]:
    """P(1+U) 的两个上半平面根 [U₁, U₂]，按 |U| 从大到小"""
    roots = np.asarray(quartic_roots(shifted_P(g, z)).roots)
    ordered = roots[np.argsort(-np.abs(roots), kind="stable")]
    big, small = ordered[:2], ordered[2:]
    return [
        complex(big[np.argmax(big.imag)]),
        complex(small[np.argmax(small.imag)]),
    ]


def observed_asymptotics(g: ReducedGroups, z: float) -> AsymptoticPrediction:
    """由数值根得到的同一组量，与 root_asymptotics 对照"""
    U1, U2 = root_pairs(g, z)
    return AsymptoticPrediction(
        u1=U1.real,
        v1_sq=U1.imag ** 2,
        u2=U2.real,
        v2_sq=U2.imag ** 2,
        modulus1_sq=abs(1.0 + U1) ** 2,
        modulus2_sq=abs(1.0 + U2) ** 2,
    )


def asymptotic_errors(g: ReducedGroups, z: float) -> Dict[str, float]:
    predicted = root_asymptotics(g, z)
    observed = observed_asymptotics(g, z)
    return {
        name: abs(getattr(observed, name) - getattr(predicted, name))
        for name in ("u1", "v1_sq", "u2", "v2_sq")
    }


def richardson_slopes(g: ReducedGroups, z_values: Sequence[float]) -> Dict[str, List[float]]:
    """相邻 z 之间误差的经验阶 log(e_k/e_{k+1}) / log(z_k/z_{k+1})"""
    if len(z_values) < 2:
        raise ValueError("at least two z values are required")

    errors = [asymptotic_errors(g, z) for z in z_values]
    slopes: Dict[str, List[float]] = {}
    for name in errors[0]:
        slopes[name] = [
            math.log(e0[name] / e1[name]) / math.log(z0 / z1)
            for (z0, e0), (z1, e1) in zip(zip(z_values, errors), zip(z_values[1:], errors[1:]))
        ]
    return slopes


__all__ = [
    "AsymptoticPrediction",
    "SexticCoefficients",
    "root_asymptotics",
    "sextic_coefficients",
    "v_squared",
    "root_pairs",
    "observed_asymptotics",
    "asymptotic_errors",
    "richardson_slopes",
]
