"""
RNStab 特征多项式
显式 Robin-Neumann 格式的四次特征多项式 χ(y)、其归一化形式 Q(y)、倒数多项式 P(x) = x^4 Q(1/x)
与平移形式 P(1+U)，以及基于伴随矩阵特征值的求根
"""

from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Any, List, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import settings
from ..model.core import (
    PhysicalParams,
    ReducedGroups,
    ParameterError,
    stiffness,
    reduced_groups,
)
from ..model.spectral import Mode


class PolyForm(str, Enum):
    """多项式形式"""
    CHI = "chi"
    Q = "Q"
    P = "P"
    SHIFTED = "shifted"  # P(1+U)，变量为 U


@dataclass(frozen=True)
class QuarticCoefficients:
    """四次多项式系数 c4..c0 (降幂)"""
    c: Tuple[float, float, float, float, float]
    form: PolyForm
    degenerate: bool = False

    def __post_init__(self):
        if len(self.c) != 5:
            raise ValueError(f"a quartic needs 5 coefficients, got {len(self.c)}")
        if self.c[0] == 0:
            raise ValueError("leading coefficient must be non-zero")

    def evaluate(self, y: complex) -> complex:
        return np.polyval(self.c, y)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["form"] = self.form.value
        return data


@dataclass(frozen=True)
class RootSet:
    """四个复根及其模、单根标记和谱半径"""
    roots: Tuple[complex, ...]
    moduli: Tuple[float, ...]
    simple: Tuple[bool, ...]
    spectral_radius: float

    @classmethod
    def from_roots(cls, roots: Sequence[complex], simple: Sequence[bool],
                   moduli: Optional[Sequence[float]] = None) -> "RootSet":
        roots = tuple(complex(r) for r in roots)
        if moduli is None:
            moduli = [abs(r) for r in roots]
        moduli = tuple(float(m) for m in moduli)
        return cls(
            roots=roots,
            moduli=moduli,
            simple=tuple(bool(s) for s in simple),
            spectral_radius=max(moduli),
        )

    @property
    def all_simple(self) -> bool:
        return all(self.simple)

    @property
    def dominant(self) -> complex:
        """模最大的根"""
        return self.roots[int(np.argmax(self.moduli))]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "roots": [
                {"re": r.real, "im": r.imag, "modulus": m, "simple": s}
                for r, m, s in zip(self.roots, self.moduli, self.simple)
            ],
            "spectral_radius": self.spectral_radius,
        }


def characteristic_chi(p: PhysicalParams, mode: Mode, alpha: float, dt: float) -> QuarticCoefficients:
    """χ(y) 的五个系数；α = 0 时返回退化形式 (ρ_s H_s/Δt^2)(y-1)^4"""
    if alpha < 0:
        raise ParameterError(f"negative alpha: alpha={alpha}")
    if not dt > 0:
        raise ParameterError(f"non-positive field: dt={dt}")

    m_s = p.structure_mass
    s = m_s / (dt * dt)

    if alpha == 0:
        return QuarticCoefficients(
            c=(s, -4.0 * s, 6.0 * s, -4.0 * s, s),
            form=PolyForm.CHI,
            degenerate=True,
        )

    m_f = p.rho_f * mode.mu
    K = stiffness(p, mode)
    r = alpha * dt / m_f
    return QuarticCoefficients(
        c=(
            s * (1.0 + r),
            -2.0 * alpha * m_s / (m_f * dt) + r * K + alpha / dt - 4.0 * s,
            alpha * m_s / (m_f * dt) - 2.0 * alpha / dt + 6.0 * s,
            alpha / dt - 4.0 * s,
            s,
        ),
        form=PolyForm.CHI,
    )


def characteristic_q(g: ReducedGroups, z: float) -> QuarticCoefficients:
    """由约化参数组直接构造 Q(y) = χ(y) Δt^2/(ρ_s H_s)"""
    A, B, C = g.A, g.B, g.C
    return QuarticCoefficients(
        c=(
            1.0 + B * z,
            -(4.0 + (2.0 * B - A) * z - A * C * z ** 3),
            6.0 + (B - 2.0 * A) * z,
            -(4.0 - A * z),
            1.0,
        ),
        form=PolyForm.Q,
    )


def to_q_form(chi: QuarticCoefficients, p: PhysicalParams, dt: float) -> QuarticCoefficients:
    """χ 乘以 Δt^2/(ρ_s H_s) 得到 Q"""
    if chi.form is not PolyForm.CHI:
        raise ValueError(f"expected a chi polynomial, got form {chi.form.value}")
    scale = dt * dt / p.structure_mass
    return QuarticCoefficients(
        c=tuple(ck * scale for ck in chi.c),
        form=PolyForm.Q,
        degenerate=chi.degenerate,
    )


def reciprocal_P(q: QuarticCoefficients) -> QuarticCoefficients:
    """P(x) = x^4 Q(1/x)：系数逆序，P 的根是 Q 的根的倒数"""
    if q.form is not PolyForm.Q:
        raise ValueError(f"expected a Q polynomial, got form {q.form.value}")
    return QuarticCoefficients(c=tuple(reversed(q.c)), form=PolyForm.P, degenerate=q.degenerate)


def shifted_P(g: ReducedGroups, z: float) -> QuarticCoefficients:
    """P(1+U) = U^4 + AzU^3 + (A+B)zU^2 + ACz^3 U + ACz^3"""
    a = g.A * z
    b = (g.A + g.B) * z
    c = g.A * g.C * z ** 3
    return QuarticCoefficients(c=(1.0, a, b, c, c), form=PolyForm.SHIFTED)


def _companion(c: Sequence[float]) -> np.ndarray:
    n = len(c) - 1
    A = np.zeros((n, n))
    rng = np.arange(n - 1)
    A[rng + 1, rng] = 1.0
    A[0, :] = -np.asarray(c[1:], dtype=float) / c[0]
    return A


def _taylor(c: Sequence[float], r: complex) -> List[complex]:
    """多项式在 r 处的 Taylor 系数 a_0..a_n (反复综合除法)"""
    coeffs = [complex(ck) for ck in c]
    out = []
    while coeffs:
        acc = coeffs[0]
        quotient = [acc]
        for ck in coeffs[1:]:
            acc = acc * r + ck
            quotient.append(acc)
        out.append(quotient[-1])
        coeffs = quotient[:-1]
    return out


def _roundoff_radius(c: Sequence[float], r: complex) -> float:
    """舍入误差能使根 r 移动的半径估计"""
    eps = np.finfo(float).eps
    size = sum(abs(ck) * abs(r) ** k for k, ck in enumerate(reversed(c)))
    target = 64.0 * eps * size
    if target == 0:
        return 0.0
    a = _taylor(c, r)
    radii = [(target / abs(aj)) ** (1.0 / j) for j, aj in enumerate(a) if j > 0 and aj != 0]
    return min(radii) if radii else 0.0


def _root_clusters(c: Sequence[float], roots: np.ndarray, rel_tol: float) -> List[List[int]]:
    """把间距不超过分辨半径的根归为同一簇 (重根)"""
    n = len(roots)
    scale = float(np.max(np.abs(roots))) if n else 0.0
    tols = [max(rel_tol * scale, _roundoff_radius(c, r)) for r in roots]

    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= max(tols[i], tols[j]):
                parent[find(j)] = find(i)

    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _horner(c: Sequence[float], x: complex) -> Tuple[complex, complex]:
    value, deriv = complex(c[0]), 0j
    for ck in c[1:]:
        deriv = deriv * x + value
        value = value * x + ck
    return value, deriv


def _polish(c: Sequence[float], r: complex, steps: int) -> complex:
    """Newton 修正，仅在残差下降时接受"""
    value, deriv = _horner(c, r)
    for _ in range(steps):
        if deriv == 0 or value == 0:
            break
        candidate = r - value / deriv
        new_value, new_deriv = _horner(c, candidate)
        if not abs(new_value) < abs(value):
            break
        r, value, deriv = candidate, new_value, new_deriv
    return r


def _conjugate_polish(c: Sequence[float], roots: np.ndarray, simple: Sequence[bool],
                      steps: int) -> np.ndarray:
    polished = roots.astype(complex).copy()
    upper = [i for i, r in enumerate(roots) if r.imag >= 0]
    for i in upper:
        if simple[i]:
            polished[i] = _polish(c, roots[i], steps)
    partners = [i for i in upper if roots[i].imag > 0]
    for i, r in enumerate(roots):
        if r.imag < 0 and partners:
            j = min(partners, key=lambda k: abs(roots[k] - np.conj(r)))
            polished[i] = np.conj(polished[j])
    return polished


def quartic_roots(q: QuarticCoefficients, rel_tol: Optional[float] = None) -> RootSet:
    """伴随矩阵特征值求根 (LAPACK 自带平衡)，带单根标记"""
    if rel_tol is None:
        rel_tol = settings.simple_root_tol

    if q.degenerate:
        # (y - r)^4，r = -c3/(4 c4)
        r = -q.c[1] / (4.0 * q.c[0])
        return RootSet.from_roots([r] * 4, [False] * 4)

    roots = np.linalg.eigvals(_companion(q.c)).astype(complex)
    simple = [True] * len(roots)
    for cluster in _root_clusters(q.c, roots, rel_tol):
        if len(cluster) > 1:
            # 重根簇用质心代替，质心由系数和精确给出
            centroid = roots[cluster].mean()
            if abs(centroid.imag) <= rel_tol * max(abs(centroid), 1.0):
                centroid = complex(centroid.real, 0.0)
            for i in cluster:
                roots[i] = centroid
                simple[i] = False
    roots = _conjugate_polish(q.c, roots, simple, settings.root_polish_steps)
    return RootSet.from_roots(roots, simple)


def shifted_roots(g: ReducedGroups, z: float, rel_tol: Optional[float] = None) -> RootSet:
    """经由 P(1+U) 计算 χ 的根 y = 1/(1+U)；单根判据在 U 变量下进行"""
    u_roots = quartic_roots(shifted_P(g, z), rel_tol)
    shifted = np.asarray(u_roots.roots) + 1.0
    moduli = 1.0 / np.abs(shifted)
    return RootSet.from_roots(1.0 / shifted, u_roots.simple, moduli)


def shifted_roots_batch(A: np.ndarray, B: np.ndarray, C: np.ndarray, z: float) -> np.ndarray:
    """批量计算多个模态的 P(1+U) 的根 U，返回形状 (n, 4)"""
    A = np.asarray(A, dtype=float)
    a = A * z
    b = (A + np.asarray(B, dtype=float)) * z
    c = A * np.asarray(C, dtype=float) * z ** 3
    coeffs = np.stack([np.ones_like(a), a, b, c, c], axis=1)

    n = coeffs.shape[0]
    companions = np.zeros((n, 4, 4))
    companions[:, 0, :] = -coeffs[:, 1:]
    companions[:, [1, 2, 3], [0, 1, 2]] = 1.0
    roots = np.linalg.eigvals(companions).astype(complex)

    # 向量化 Newton 修正
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(settings.root_polish_steps):
            value, deriv = _horner_batch(coeffs, roots)
            candidate = roots - value / deriv
            new_value, _ = _horner_batch(coeffs, candidate)
            accept = np.isfinite(candidate) & (np.abs(new_value) < np.abs(value))
            roots = np.where(accept, candidate, roots)
    return roots


def _horner_batch(coeffs: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    value = np.broadcast_to(coeffs[:, :1], x.shape).astype(complex)
    deriv = np.zeros_like(value)
    for k in range(1, coeffs.shape[1]):
        deriv = deriv * x + value
        value = value * x + coeffs[:, k:k + 1]
    return value, deriv


def chi_roots(p: PhysicalParams, mode: Mode, alpha: float, dt: float) -> RootSet:
    """单个模态的 χ 根；α > 0 时经由平移形式计算"""
    if alpha == 0:
        return quartic_roots(characteristic_chi(p, mode, alpha, dt))
    return shifted_roots(reduced_groups(p, alpha, mode), dt)


__all__ = [
    "PolyForm",
    "QuarticCoefficients",
    "RootSet",
    "characteristic_chi",
    "characteristic_q",
    "to_q_form",
    "reciprocal_P",
    "shifted_P",
    "quartic_roots",
    "shifted_roots",
    "shifted_roots_batch",
    "chi_roots",
]
