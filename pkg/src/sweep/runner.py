"""
RNStab 参数扫描
稳定性图、临界步长、精度扫描、网格加密研究与趋势检查
"""

import math
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Any, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..config.settings import settings
from ..model.core import PhysicalParams, Discretization, ParameterError
from ..model.spectral import Mode, build_spectrum, truncation_from_h
from ..analysis.stability import (
    Classification,
    classify,
    critical_dt,
    thresholds,
    alpha1_joint_limit,
)
from ..solvers.coupled import Scheme, InitialData, simulate, growth_rate
from .executor import run_grid


class Spacing(str, Enum):
    """网格间距"""
    LINEAR = "linear"
    LOG = "log"


class Evaluation(str, Enum):
    """评估方式"""
    ANALYTIC = "analytic_roots"
    EMPIRICAL = "empirical_simulation"
    BOTH = "both"


FAILED = "failed"

SWEEP_COLUMNS = [
    "alpha",
    "dt",
    "n_modes",
    "spectral_radius",
    "worst_mode",
    "classification",
    "gamma_max",
    "instability_sufficient",
    "empirical_growth",
    "blow_up_step",
]


@dataclass(frozen=True)
class RangeSpec:
    """取值范围 min:max:count[:log|lin]"""
    min: float
    max: float
    count: int
    spacing: Spacing = Spacing.LOG

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"range count must be at least 1, got {self.count}")
        if self.min > self.max:
            raise ValueError(f"range min {self.min} exceeds max {self.max}")
        if self.spacing is Spacing.LOG and not self.min > 0:
            raise ValueError(f"log range needs a positive min, got {self.min}")

    @classmethod
    def parse(cls, text: str, default_spacing: Spacing = Spacing.LOG) -> "RangeSpec":
        parts = [part.strip() for part in text.split(":")]
        if len(parts) not in (3, 4):
            raise ValueError(f"range must look like min:max:count[:log|lin], got '{text}'")
        spacing = default_spacing
        if len(parts) == 4:
            key = parts[3].lower()
            if key in ("lin", "linear"):
                spacing = Spacing.LINEAR
            elif key == "log":
                spacing = Spacing.LOG
            else:
                raise ValueError(f"unknown range spacing '{parts[3]}'")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]), spacing)
        except ValueError as e:
            raise ValueError(f"malformed range '{text}': {e}") from e

    def values(self) -> List[float]:
        if self.count == 1:
            return [self.min]
        if self.spacing is Spacing.LOG:
            return [float(v) for v in np.geomspace(self.min, self.max, self.count)]
        return [float(v) for v in np.linspace(self.min, self.max, self.count)]


Grid = Union[RangeSpec, Sequence[float]]


def _grid_values(grid: Grid) -> List[float]:
    if isinstance(grid, RangeSpec):
        return grid.values()
    return [float(v) for v in grid]


@dataclass(frozen=True)
class SweepSpec:
    """稳定性图的扫描规格；mesh_grid 为模态数列表"""
    alpha_grid: Grid
    dt_grid: Grid
    mesh_grid: Tuple[int, ...]
    params: PhysicalParams
    evaluation: Evaluation = Evaluation.ANALYTIC
    init: InitialData = InitialData(eta1=1.0, eta0=1.0, u0=0.0)
    empirical_steps: Optional[int] = None
    burn_in: Optional[int] = None

    def __post_init__(self):
        if not self.alphas() or not self.dts() or not self.mesh_grid:
            raise ValueError("sweep grids must be non-empty")
        if any(a < 0 for a in self.alphas()):
            raise ParameterError("negative alpha in sweep grid")
        if any(not dt > 0 for dt in self.dts()):
            raise ParameterError("non-positive field: dt in sweep grid")
        if any(n < 1 for n in self.mesh_grid):
            raise ParameterError("zero modes in sweep mesh grid")

    @classmethod
    def from_h_values(cls, h_values: Sequence[float], params: PhysicalParams, **kwargs) -> "SweepSpec":
        """网格以 h 给出时换算为模态数"""
        mesh = tuple(truncation_from_h(params.length, h) for h in h_values)
        return cls(mesh_grid=mesh, params=params, **kwargs)

    def alphas(self) -> List[float]:
        return _grid_values(self.alpha_grid)

    def dts(self) -> List[float]:
        return _grid_values(self.dt_grid)

    def grid_points(self) -> List[Tuple[float, float, int]]:
        """α 优先，其次 Δt，最后网格"""
        return [
            (alpha, dt, int(n_modes))
            for alpha in self.alphas()
            for dt in self.dts()
            for n_modes in self.mesh_grid
        ]


@dataclass
class SweepRecord:
    """稳定性图的一行"""
    alpha: float
    dt: float
    n_modes: int
    spectral_radius: float
    worst_mode: int
    classification: str
    gamma_max: float
    instability_sufficient: bool
    empirical_growth: Optional[float] = None
    blow_up_step: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AccuracyRecord:
    """精度扫描的一行：相对隐式参考的 L² 时间误差"""
    alpha: float
    error: Optional[float]
    per_mode_error: Tuple[Optional[float], ...]
    stable: bool
    blow_up_step: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["per_mode_error"] = list(self.per_mode_error)
        return data


@dataclass
class MeshRecord:
    """网格加密研究的一行"""
    h: float
    n_modes: int
    dt_star: Optional[float]
    dt_star_over_h: Optional[float]
    alpha_1: Optional[float]
    alpha_1_limit: Optional[float]
    found: bool

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class _SpectrumCache:
    def __init__(self, params: PhysicalParams):
        self.params = params
        self._spectra: Dict[int, List[Mode]] = {}

    def get(self, n_modes: int) -> List[Mode]:
        if n_modes not in self._spectra:
            self._spectra[n_modes] = build_spectrum(self.params, n_modes)
        return self._spectra[n_modes]


def _empirical(params: PhysicalParams, mode: Mode, alpha: float, dt: float, init: InitialData,
               steps: int, burn_in: int) -> Tuple[Optional[float], Optional[int]]:
    """在最差模态上推进递推格式，返回 (增长率, 爆破步)"""
    scheme = Scheme.RECURRENCE if alpha > 0 else Scheme.EXPLICIT_RN
    traj = simulate(scheme, params, Discretization(dt=dt, n_modes=mode.index, n_steps=steps),
                    mode, alpha, init)
    burn = min(burn_in, len(traj.eta) // 2)
    growth = growth_rate(traj, burn) if len(traj.eta) > burn + 10 else None
    return growth, traj.blow_up


def empirical_agrees(record: SweepRecord, margin: float = 1e-3) -> Optional[bool]:
    """解析分类与仿真是否一致；|ρ − 1| ≤ margin 时不判断"""
    radius = record.spectral_radius
    if record.classification == FAILED or abs(radius - 1.0) <= margin:
        return None
    if radius > 1.0:
        return record.blow_up_step is not None or (
            record.empirical_growth is not None and record.empirical_growth > 1.0
        )
    return record.blow_up_step is None


def evaluate_point(spec: SweepSpec, point: Tuple[float, float, int],
                   cache: Optional[_SpectrumCache] = None) -> SweepRecord:
    """单个网格点；失败写入该行而不中断扫描"""
    alpha, dt, n_modes = point
    cache = cache or _SpectrumCache(spec.params)
    try:
        spectrum = cache.get(n_modes)
        verdict = classify(spec.params, spectrum, alpha, dt)
        record = SweepRecord(
            alpha=alpha,
            dt=dt,
            n_modes=n_modes,
            spectral_radius=verdict.spectral_radius,
            worst_mode=verdict.worst_mode,
            classification=verdict.classification.value,
            gamma_max=verdict.gamma_max,
            instability_sufficient=verdict.instability_sufficient,
        )
        if spec.evaluation is not Evaluation.ANALYTIC:
            mode = spectrum[verdict.worst_mode - 1]
            record.empirical_growth, record.blow_up_step = _empirical(
                spec.params, mode, alpha, dt, spec.init,
                spec.empirical_steps or settings.empirical_steps,
                spec.burn_in if spec.burn_in is not None else settings.growth_burn_in,
            )
        return record
    except Exception as e:
        logger.error(f"Point alpha={alpha}, dt={dt}, n_modes={n_modes} failed: {e}")
        return SweepRecord(
            alpha=alpha,
            dt=dt,
            n_modes=n_modes,
            spectral_radius=math.nan,
            worst_mode=0,
            classification=FAILED,
            gamma_max=math.nan,
            instability_sufficient=False,
        )


def run_stability_map(spec: SweepSpec, jobs: Optional[int] = None) -> List[SweepRecord]:
    """逐点分类，输出顺序为 α、Δt、网格的字典序"""
    jobs = settings.default_jobs if jobs is None else jobs
    points = spec.grid_points()
    cache = _SpectrumCache(spec.params)
    for n_modes in spec.mesh_grid:
        cache.get(int(n_modes))

    logger.info(f"Stability map started: {len(points)} points, evaluation={spec.evaluation.value}, jobs={jobs}")
    records = run_grid(lambda point: evaluate_point(spec, point, cache), points, jobs)

    for record in records:
        if record.instability_sufficient and record.classification != Classification.UNSTABLE.value:
            logger.warning(
                f"Sufficient instability condition without unstable class at "
                f"alpha={record.alpha}, dt={record.dt}, n_modes={record.n_modes}"
            )
        if spec.evaluation is Evaluation.BOTH and empirical_agrees(record) is False:
            logger.warning(
                f"Empirical evaluation disagrees with roots at alpha={record.alpha}, dt={record.dt}, "
                f"n_modes={record.n_modes}: radius={record.spectral_radius:.6g}, "
                f"growth={record.empirical_growth}, blow_up={record.blow_up_step}"
            )

    check_dt_downsets(records)
    counts = {c.value: sum(r.classification == c.value for r in records) for c in Classification}
    logger.info(f"Stability map finished: {counts}")
    return records


def check_dt_downsets(records: Sequence[SweepRecord]) -> List[Tuple[float, int]]:
    """固定 (α, 网格) 时，稳定的 Δt 应构成排序网格的下集；返回违反的组合"""
    groups: Dict[Tuple[float, int], List[SweepRecord]] = {}
    for record in records:
        groups.setdefault((record.alpha, record.n_modes), []).append(record)

    violations = []
    for key, rows in groups.items():
        rows = sorted(rows, key=lambda r: r.dt)
        seen_non_stable = False
        for row in rows:
            stable = row.classification == Classification.STABLE.value
            if stable and seen_non_stable:
                violations.append(key)
                break
            seen_non_stable = seen_non_stable or not stable

    for alpha, n_modes in violations:
        logger.warning(f"Stable dt values do not form a down-set for alpha={alpha}, n_modes={n_modes}")
    return violations


def table_patterns(records: Sequence[SweepRecord]) -> Dict[str, Optional[Dict[str, Any]]]:
    """寻找三种趋势的实例：(a) 增大 Δt 失稳 (b) 增大 α 失稳 (c) 加密网格失稳"""
    status = {
        (r.alpha, r.dt, r.n_modes): r.classification
        for r in records
        if r.classification != FAILED
    }
    stable, unstable = Classification.STABLE.value, Classification.UNSTABLE.value

    def find(axis: int) -> Optional[Dict[str, Any]]:
        # 沿 axis 的每条网格线上找先稳定后不稳定的一对点
        lines: Dict[Tuple[Any, ...], List[Tuple[Tuple[float, float, int], str]]] = {}
        for key, cls in status.items():
            rest = tuple(key[i] for i in range(3) if i != axis)
            lines.setdefault(rest, []).append((key, cls))

        for entries in lines.values():
            entries.sort(key=lambda e: e[0][axis])
            stable_at = None
            for key, cls in entries:
                if cls == stable and stable_at is None:
                    stable_at = key
                elif cls == unstable and stable_at is not None:
                    return {"stable_at": stable_at, "unstable_at": key}
        return None

    return {
        "larger_dt_destabilizes": find(1),
        "larger_alpha_destabilizes": find(0),
        "finer_mesh_destabilizes": find(2),
    }


def run_accuracy_scan(params: PhysicalParams, dt: float, alphas: Sequence[float], horizon: int,
                      init: InitialData, n_modes: int = 1,
                      jobs: Optional[int] = None) -> List[AccuracyRecord]:
    """每个 α 下显式 Robin-Neumann 相对隐式参考的位移误差"""
    if any(a < 0 for a in alphas):
        raise ParameterError("negative alpha in accuracy scan")
    jobs = settings.default_jobs if jobs is None else jobs
    d = Discretization(dt=dt, n_modes=n_modes, n_steps=horizon)
    spectrum = build_spectrum(params, n_modes)
    references = [simulate(Scheme.IMPLICIT_REF, params, d, mode, 0.0, init) for mode in spectrum]

    def scan_one(alpha: float) -> AccuracyRecord:
        diff_sq, ref_sq, per_mode = 0.0, 0.0, []
        for mode, ref in zip(spectrum, references):
            traj = simulate(Scheme.EXPLICIT_RN, params, d, mode, alpha, init)
            if traj.blown_up:
                return AccuracyRecord(
                    alpha=alpha,
                    error=None,
                    per_mode_error=tuple([None] * len(spectrum)),
                    stable=False,
                    blow_up_step=traj.blow_up,
                )
            d_sq = float(np.sum((traj.eta - ref.eta) ** 2))
            r_sq = float(np.sum(ref.eta ** 2))
            per_mode.append(math.sqrt(d_sq / r_sq) if r_sq > 0 else None)
            diff_sq += d_sq
            ref_sq += r_sq
        return AccuracyRecord(
            alpha=alpha,
            error=math.sqrt(diff_sq / ref_sq) if ref_sq > 0 else None,
            per_mode_error=tuple(per_mode),
            stable=True,
        )

    logger.info(f"Accuracy scan started: {len(alphas)} alpha values, dt={dt}, horizon={horizon}")
    records = run_grid(scan_one, list(alphas), jobs)
    best = best_accuracy(records)
    if best is not None:
        logger.info(f"Accuracy scan finished: best alpha={best.alpha} (error={best.error:.6g})")
    else:
        logger.warning("Accuracy scan finished without any stable run")
    return records


def best_accuracy(records: Sequence[AccuracyRecord]) -> Optional[AccuracyRecord]:
    """误差最小的稳定记录"""
    candidates = [r for r in records if r.stable and r.error is not None]
    return min(candidates, key=lambda r: r.error) if candidates else None


def critical_dt_scaling(params: PhysicalParams, spectrum: Sequence[Mode], alphas: Sequence[float],
                        tol: Optional[float] = None,
                        bracket: Optional[Tuple[float, float]] = None) -> Dict[str, Any]:
    """α·Δt* 随 α 的变化，比值小于 2 视为符合 Δt* ∝ 1/α 的趋势 (仅提示)"""
    rows = []
    for alpha in alphas:
        result = critical_dt(params, spectrum, alpha, tol, bracket)
        rows.append({
            "alpha": alpha,
            "dt_star": result.dt_star,
            "product": alpha * result.dt_star if result.found else None,
        })

    products = [row["product"] for row in rows if row["product"] is not None]
    ratio = max(products) / min(products) if products else None
    advisory_ok = ratio is not None and ratio < 2.0
    if not advisory_ok:
        logger.warning(f"alpha*dt_star varies by a factor {ratio} across the alpha range")
    return {"rows": rows, "ratio": ratio, "advisory_ok": advisory_ok}


def run_mesh_study(params: PhysicalParams, alpha: float, h_values: Sequence[float],
                   dt_ratio: float = 0.2, tol: Optional[float] = None,
                   jobs: Optional[int] = None) -> List[MeshRecord]:
    """逐个 h 求 Δt* 与 Δt*/h，并给出 Δt = dt_ratio·h 下的 α₁"""
    jobs = settings.default_jobs if jobs is None else jobs
    limit = alpha1_joint_limit(params, dt_ratio)

    def study_one(h: float) -> MeshRecord:
        n_modes = truncation_from_h(params.length, h)
        spectrum = build_spectrum(params, n_modes)
        result = critical_dt(params, spectrum, alpha, tol)
        joint = thresholds(params, spectrum, dt_ratio * h)
        return MeshRecord(
            h=h,
            n_modes=n_modes,
            dt_star=result.dt_star,
            dt_star_over_h=result.dt_star / h if result.found else None,
            alpha_1=joint.alpha_1,
            alpha_1_limit=limit,
            found=result.found,
        )

    logger.info(f"Mesh study started: alpha={alpha}, {len(h_values)} mesh sizes")
    return run_grid(study_one, list(h_values), jobs)


__all__ = [
    "Spacing",
    "Evaluation",
    "FAILED",
    "SWEEP_COLUMNS",
    "RangeSpec",
    "SweepSpec",
    "SweepRecord",
    "AccuracyRecord",
    "MeshRecord",
    "empirical_agrees",
    "evaluate_point",
    "run_stability_map",
    "check_dt_downsets",
    "table_patterns",
    "run_accuracy_scan",
    "best_accuracy",
    "critical_dt_scaling",
    "run_mesh_study",
]
