"""
RNStab 核心配置系统
管理数值容差、日志、并发等全局设置，以及平面键值参数文件的读取
"""

import sys
from pathlib import Path
from typing import Optional, Dict, Any, Tuple, Union

from dotenv import dotenv_values
from loguru import logger
from pydantic import BaseModel, ConfigDict
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..model.core import (
    PhysicalParams,
    Discretization,
    ParameterError,
    validate_params,
)


class Settings(BaseSettings):
    """主配置类"""

    # 基础设置
    app_name: str = "RNStab"
    app_version: str = "1.0.0"

    # 日志设置
    log_level: str = "INFO"
    log_file: Optional[Path] = None
    log_rotation: str = "10 MB"
    log_retention: str = "30 days"

    # 数值容差
    blow_up_factor: float = 1e8
    blow_up_floor: float = 1e-30   # 零初值时的量级下限 ε₀
    simple_root_tol: float = 1e-8  # 单根判据：两两距离 > tol × 最大模
    stability_margin: float = 1e-9
    root_polish_steps: int = 2

    # 扫描设置
    default_jobs: int = 1
    empirical_steps: int = 2000
    growth_burn_in: int = 200
    csv_float_format: str = "%.17g"

    # 临界步长搜索
    critical_dt_tol: float = 1e-3
    critical_dt_bracket: Tuple[float, float] = (1e-6, 1e-2)

    model_config = SettingsConfigDict(
        env_prefix="RNSTAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    def get_numerics_config(self) -> Dict[str, Any]:
        """数值相关配置，写入 JSON 结果文档的 numerics 字段"""
        return {
            "blow_up_factor": self.blow_up_factor,
            "blow_up_floor": self.blow_up_floor,
            "simple_root_tol": self.simple_root_tol,
            "stability_margin": self.stability_margin,
            "empirical_steps": self.empirical_steps,
            "growth_burn_in": self.growth_burn_in,
        }


class RunConfig(BaseModel):
    """一次运行的物理与离散参数 (键名与参数文件、命令行一致)"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    rho_f: float = 1.0
    rho_s: float = 1.1
    h_s: float = 0.1
    beta: float = 4e4
    psi: float = 4e4
    radius: float = 0.5
    length: float = 5.0
    dt: float = 5e-4
    n_modes: int = 50
    n_steps: int = 200
    alpha: float = 1e3

    def physical(self) -> PhysicalParams:
        return PhysicalParams(
            rho_f=self.rho_f,
            rho_s=self.rho_s,
            h_s=self.h_s,
            beta=self.beta,
            psi=self.psi,
            radius=self.radius,
            length=self.length,
        )

    def discretization(self) -> Discretization:
        return Discretization(dt=self.dt, n_modes=self.n_modes, n_steps=self.n_steps)

    def validated(self) -> Tuple[PhysicalParams, Discretization]:
        """返回校验后的 (PhysicalParams, Discretization)"""
        if self.alpha < 0:
            raise ParameterError(f"negative alpha: alpha={self.alpha}")
        return validate_params(self.physical(), self.discretization())


def read_parameter_file(path: Union[str, Path]) -> Dict[str, str]:
    """读取平面键值文件 (key = value，# 注释)"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"parameter file not found: {path}")
    values = dotenv_values(path)
    return {key.strip().lower(): value for key, value in values.items() if value is not None}


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    base: Optional[RunConfig] = None
) -> RunConfig:
    """合并 基础配置 < 参数文件 < 命令行覆盖"""
    data: Dict[str, Any] = (base or RunConfig()).model_dump()
    if path is not None:
        data.update(read_parameter_file(path))
    if overrides:
        data.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.model_validate(data)


def setup_logging(config: Optional[Settings] = None, level: Optional[str] = None) -> None:
    """配置 loguru：stderr 输出，可选滚动日志文件"""
    config = config or settings
    logger.remove()
    logger.add(sys.stderr, level=(level or config.log_level).upper())
    if config.log_file is not None:
        logger.add(
            config.log_file,
            level=(level or config.log_level).upper(),
            rotation=config.log_rotation,
            retention=config.log_retention,
        )


# 全局设置实例
settings = Settings()

# 导出常用配置
__all__ = [
    "Settings",
    "RunConfig",
    "read_parameter_file",
    "load_run_config",
    "setup_logging",
    "settings",
]
