"""
RNStab 模态耦合求解器
单个界面模态上的三种时间推进：显式 Robin-Neumann (流体 Robin 子步 + 结构 leap-frog 子步)、
消去 u、p 后的五项位移递推、以及隐式整体参考格式；另有爆破检测、运动学缺陷与增长率估计
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Any, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..config.settings import settings
from ..model.core import PhysicalParams, Discretization, ParameterError, stiffness
from ..model.spectral import Mode
from ..analysis.polynomials import characteristic_chi


class Scheme(str, Enum):
    """时间推进格式"""
    EXPLICIT_RN = "explicit_rn"
    RECURRENCE = "recurrence"
    IMPLICIT_REF = "implicit_ref"


@dataclass(frozen=True)
class InitialData:
    """模态初值 η¹、η⁰、u⁰；η⁻¹、η⁻² 缺省时按约定补齐"""
    eta1: float
    eta0: float
    u0: float = 0.0
    eta_m1: Optional[float] = None
    eta_m2: Optional[float] = None

    def scaled(self, c: float) -> "InitialData":
        return InitialData(
            eta1=c * self.eta1,
            eta0=c * self.eta0,
            u0=c * self.u0,
            eta_m1=None if self.eta_m1 is None else c * self.eta_m1,
            eta_m2=None if self.eta_m2 is None else c * self.eta_m2,
        )


@dataclass(frozen=True)
class ModalState:
    """第 n 步开始时的状态：eta_hist = (ηⁿ, ηⁿ⁻¹, ηⁿ⁻², ηⁿ⁻³)，u = uⁿ⁻¹，p = pⁿ⁻¹"""
    eta_hist: Tuple[float, float, float, float]
    u: float
    p: float
    step: int

    def __post_init__(self):
        if len(self.eta_hist) != 4:
            raise ValueError(f"history must hold 4 displacements, got {len(self.eta_hist)}")


@dataclass
class ModalTrajectory:
    """单模态轨迹：eta[m] = η^m (m = 0..N+1)，u[n]、p[n] (n = 0..N)"""
    scheme: Scheme
    mode_index: int
    dt: float
    eta: np.ndarray
    u: np.ndarray
    p: np.ndarray
    blow_up: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.u) - 1

    @property
    def blown_up(self) -> bool:
        return self.blow_up is not None

    def series(self) -> List[Dict[str, Any]]:
        """逐步记录 (step, time, eta, u, p, blown_up)，第 n 行的 eta 为 ηⁿ"""
        rows = []
        for n in range(len(self.u)):
            rows.append({
                "step": n,
                "time": n * self.dt,
                "eta": float(self.eta[n]),
                "u": float(self.u[n]),
                "p": float(self.p[n]),
                "blown_up": self.blow_up is not None and n >= self.blow_up,
            })
        return rows


def _robin_rhs(e0: float, e1: float, e2: float, m_s: float, K: float, alpha: float,
               dt: float) -> float:
    return -alpha * (e0 - e1) / dt + m_s * (e0 - 2.0 * e1 + e2) / (dt * dt) + K * e0


def step_explicit_rn(state: ModalState, p: PhysicalParams, mode: Mode, alpha: float,
                     dt: float) -> ModalState:
    """显式 Robin-Neumann 一步：流体 Robin 子步求 uⁿ、pⁿ，结构 leap-frog 子步求 ηⁿ⁺¹"""
    if alpha < 0:
        raise ParameterError(f"negative alpha: alpha={alpha}")

    e0, e1, e2, _ = state.eta_hist
    m_s = p.structure_mass
    m_f = p.rho_f * mode.mu
    K = stiffness(p, mode)

    # Robin 右端项 gⁿ；与附加质量关系 pⁿ = −ρ_fμ_i(uⁿ−uⁿ⁻¹)/Δt 联立
    g = _robin_rhs(e0, e1, e2, m_s, K, alpha, dt)
    u = (m_f * state.u / dt - g) / (alpha + m_f / dt)
    pressure = g + alpha * u

    eta_next = 2.0 * e0 - e1 + (dt * dt / m_s) * (pressure - K * e0)
    return ModalState(
        eta_hist=(eta_next, e0, e1, e2),
        u=u,
        p=pressure,
        step=state.step + 1,
    )


def step_recurrence(eta_hist: Sequence[float], p: PhysicalParams, mode: Mode, alpha: float,
                    dt: float) -> float:
    """五项递推 c4 ηⁿ⁺¹ + c3 ηⁿ + c2 ηⁿ⁻¹ + c1 ηⁿ⁻² + c0 ηⁿ⁻³ = 0，系数即 χ(y)"""
    e0, e1, e2, e3 = eta_hist
    if not all(np.isfinite(eta_hist)):
        raise ValueError("non-finite displacement history")

    if alpha == 0:
        # 未归一化方程：四阶差分为零
        return 4.0 * e0 - 6.0 * e1 + 4.0 * e2 - e3

    c4, c3, c2, c1, c0 = characteristic_chi(p, mode, alpha, dt).c
    return -(c3 * e0 + c2 * e1 + c1 * e2 + c0 * e3) / c4


def step_implicit_reference(eta_hist: Sequence[float], p: PhysicalParams, mode: Mode,
                            dt: float) -> float:
    """(ρ_sH_s + ρ_fμ_i)(ηⁿ⁺¹ − 2ηⁿ + ηⁿ⁻¹)/Δt² + (β+ψλ_i)ηⁿ⁺¹ = 0"""
    e0, e1 = eta_hist[0], eta_hist[1]
    M = p.structure_mass + p.rho_f * mode.mu
    return M * (2.0 * e0 - e1) / (M + dt * dt * stiffness(p, mode))


def implicit_companion(p: PhysicalParams, mode: Mode, dt: float) -> np.ndarray:
    """隐式参考格式的两步伴随矩阵"""
    M = p.structure_mass + p.rho_f * mode.mu
    denominator = M + dt * dt * stiffness(p, mode)
    return np.array([
        [2.0 * M / denominator, -M / denominator],
        [1.0, 0.0],
    ])


def startup_convention(init: InitialData) -> Dict[str, str]:
    """起步约定标记：η⁻¹、η⁻² 是调用方给定还是按约定补齐"""
    return {
        "eta_m1": "eta0" if init.eta_m1 is None else "supplied",
        "eta_m2": "reconstructed" if init.eta_m2 is None else "supplied",
    }


@lru_cache(maxsize=None)
def _warn_startup(eta_m1: str, eta_m2: str) -> None:
    # 每种约定每个进程只提示一次
    logger.warning(f"Startup convention in use: eta_m1={eta_m1}, eta_m2={eta_m2}")


def startup_history(p: PhysicalParams, alpha: float, dt: float,
                    init: InitialData) -> Tuple[float, float, float, float]:
    """起步历史 (η¹, η⁰, η⁻¹, η⁻²)

    η⁻¹ 缺省取 η⁰。η⁻² 缺省时由 n = 0 处的运动学缺陷恒等式从 u⁰ 反解，
    使递推与显式 Robin-Neumann 从第一步起给出同一序列；平坦初值且 u⁰ = 0 时即 η⁻² = η⁰。
    """
    eta_m1 = init.eta0 if init.eta_m1 is None else init.eta_m1
    if init.eta_m2 is not None:
        eta_m2 = init.eta_m2
    elif alpha == 0:
        eta_m2 = init.eta1 - 3.0 * init.eta0 + 3.0 * eta_m1
    else:
        correction = (init.u0 - (init.eta0 - eta_m1) / dt) * alpha * dt * dt / p.structure_mass
        eta_m2 = init.eta1 - 3.0 * init.eta0 + 3.0 * eta_m1 - correction
    return init.eta1, init.eta0, eta_m1, eta_m2


def blow_up_threshold(init: InitialData, dt: float) -> float:
    scale = max(abs(init.eta1), abs(init.eta0), abs(init.u0) * dt, settings.blow_up_floor)
    return settings.blow_up_factor * scale


def simulate(scheme: Scheme, p: PhysicalParams, d: Discretization, mode: Mode, alpha: float,
             init: InitialData, stop_on_blow_up: bool = True) -> ModalTrajectory:
    """推进 d.n_steps 步；|η| 超过阈值或出现非有限值时记录爆破步"""
    scheme = Scheme(scheme)
    if alpha < 0:
        raise ParameterError(f"negative alpha: alpha={alpha}")

    dt = d.dt
    m_f = p.rho_f * mode.mu
    K = stiffness(p, mode)
    threshold = blow_up_threshold(init, dt)
    history = startup_history(p, alpha, dt, init)
    startup = startup_convention(init)
    if set(startup.values()) != {"supplied"}:
        _warn_startup(startup["eta_m1"], startup["eta_m2"])

    eta = [init.eta0, init.eta1]
    u_series = [init.u0]
    p_series = [0.0]
    blow_up = None

    state = ModalState(eta_hist=history, u=init.u0, p=0.0, step=1)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, d.n_steps + 1):
            if scheme is Scheme.EXPLICIT_RN:
                state = step_explicit_rn(state, p, mode, alpha, dt)
                eta_next, u, pressure = state.eta_hist[0], state.u, state.p
            else:
                if scheme is Scheme.RECURRENCE:
                    eta_next = step_recurrence(state.eta_hist, p, mode, alpha, dt)
                else:
                    eta_next = step_implicit_reference(state.eta_hist, p, mode, dt)
                e0, e1, e2, _ = state.eta_hist
                if scheme is Scheme.IMPLICIT_REF:
                    # 运动学条件精确成立
                    u = (e0 - e1) / dt
                    pressure = -m_f * (u - state.u) / dt
                elif alpha == 0:
                    pressure = _robin_rhs(e0, e1, e2, p.structure_mass, K, 0.0, dt)
                    u = state.u - pressure * dt / m_f
                else:
                    # 运动学缺陷恒等式反解 uⁿ
                    third = eta_next - 3.0 * e0 + 3.0 * e1 - e2
                    u = (e0 - e1) / dt + p.structure_mass * third / (alpha * dt * dt)
                    pressure = -m_f * (u - state.u) / dt
                state = ModalState(
                    eta_hist=(eta_next, e0, e1, e2),
                    u=u,
                    p=pressure,
                    step=n + 1,
                )

            eta.append(eta_next)
            u_series.append(u)
            p_series.append(pressure)

            if not np.isfinite(eta_next) or abs(eta_next) > threshold:
                if blow_up is None:
                    blow_up = n
                    logger.debug(f"Blow-up of mode {mode.index} ({scheme.value}) at step {n}")
                if stop_on_blow_up or not np.isfinite(eta_next):
                    break

    return ModalTrajectory(
        scheme=scheme,
        mode_index=mode.index,
        dt=dt,
        eta=np.asarray(eta, dtype=float),
        u=np.asarray(u_series, dtype=float),
        p=np.asarray(p_series, dtype=float),
        blow_up=blow_up,
        metadata={
            "alpha": alpha,
            "structure_mass": p.structure_mass,
            "startup": startup,
            "history": list(history),
        },
    )


def simulate_modes(scheme: Scheme, p: PhysicalParams, d: Discretization, spectrum: Sequence[Mode],
                   alpha: float, init: InitialData,
                   stop_on_blow_up: bool = True) -> List[ModalTrajectory]:
    """各模态独立推进 (模型中模态间无耦合)"""
    return [simulate(scheme, p, d, mode, alpha, init, stop_on_blow_up) for mode in spectrum]


def kinematic_defect(traj: ModalTrajectory, n: int, p: PhysicalParams, alpha: float,
                     dt: Optional[float] = None) -> float:
    """uⁿ − (ηⁿ−ηⁿ⁻¹)/Δt − ρ_sH_s(ηⁿ⁺¹−3ηⁿ+3ηⁿ⁻¹−ηⁿ⁻²)/(αΔt²)；α = 0 时返回三阶差分/Δt"""
    dt = traj.dt if dt is None else dt
    if not (2 <= n <= traj.n_steps and n + 1 < len(traj.eta)):
        raise ValueError(f"step {n} outside the interior range [2, {traj.n_steps}]")

    eta = traj.eta
    third = eta[n + 1] - 3.0 * eta[n] + 3.0 * eta[n - 1] - eta[n - 2]
    if alpha == 0:
        return float(third / dt)
    return float(traj.u[n] - (eta[n] - eta[n - 1]) / dt - p.structure_mass * third / (alpha * dt * dt))


def growth_rate(traj: ModalTrajectory, burn_in: int) -> Optional[float]:
    """burn_in 之后 4 点滑动窗口最大值相邻比值的几何平均；全零轨迹返回 None"""
    eta = np.abs(traj.eta)
    if len(eta) <= burn_in + 10:
        raise ValueError(f"trajectory of length {len(eta)} too short for burn-in {burn_in}")

    windows = np.lib.stride_tricks.sliding_window_view(eta[burn_in:], 4).max(axis=1)
    usable = windows > np.finfo(float).tiny
    if not usable.all():
        windows = windows[:int(np.argmin(usable))]
    if len(windows) < 11:
        return None

    log_w = np.log(windows)
    return float(np.exp((log_w[-1] - log_w[0]) / (len(log_w) - 1)))


def max_growth(trajectories: Sequence[ModalTrajectory], burn_in: int) -> Optional[float]:
    """多模态轨迹的最大增长率"""
    rates = [growth_rate(t, burn_in) for t in trajectories]
    rates = [r for r in rates if r is not None]
    return max(rates) if rates else None


__all__ = [
    "Scheme",
    "InitialData",
    "ModalState",
    "ModalTrajectory",
    "step_explicit_rn",
    "step_recurrence",
    "step_implicit_reference",
    "implicit_companion",
    "startup_convention",
    "startup_history",
    "blow_up_threshold",
    "simulate",
    "simulate_modes",
    "kinematic_defect",
    "growth_rate",
    "max_growth",
]
