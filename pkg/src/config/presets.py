"""
RNStab 参数预设系统
面向常见研究场景的命名参数组合
"""

from typing import Dict, Any, List
from enum import Enum
from dataclasses import dataclass, field

from .settings import RunConfig


class PresetName(str, Enum):
    """预设名称"""
    HEMODYNAMIC = "hemodynamic"
    DIRICHLET_NEUMANN = "dirichlet_neumann"
    HEAVY_WALL = "heavy_wall"
    COARSE_MESH = "coarse_mesh"


@dataclass
class ParameterPreset:
    """参数预设"""
    name: str
    description: str
    values: Dict[str, Any] = field(default_factory=dict)  # 相对默认 RunConfig 的改动

    def to_run_config(self) -> RunConfig:
        return RunConfig(**self.values)


class ParameterPresets:
    """参数预设管理器"""

    PRESETS = {
        PresetName.HEMODYNAMIC: ParameterPreset(
            name="🩸 血流动力学",
            description="ρ_f≈ρ_s 的薄壁管道，附加质量效应强 (默认参数)",
        ),
        PresetName.DIRICHLET_NEUMANN: ParameterPreset(
            name="🧱 Dirichlet-Neumann 极限",
            description="α 取极大值，对应显式 Dirichlet-Neumann 格式",
            values={"alpha": 1e12},
        ),
        PresetName.HEAVY_WALL: ParameterPreset(
            name="🏋️ 厚重管壁",
            description="ρ_sH_s > ρ_fμ₁，附加质量效应弱，条件 iii 不适用",
            values={"rho_s": 100.0},
        ),
        PresetName.COARSE_MESH: ParameterPreset(
            name="🔲 粗网格",
            description="只保留 10 个模态，α₁ 在小 Δt 下仍有定义",
            values={"n_modes": 10},
        ),
    }

    @classmethod
    def get_run_config(cls, preset: PresetName) -> RunConfig:
        """获取预设对应的运行配置"""
        return cls.PRESETS[PresetName(preset)].to_run_config()

    @classmethod
    def get_recommended_presets(cls) -> List[Dict[str, Any]]:
        """预设列表 (供命令行帮助显示)"""
        return [
            {
                "key": key.value,
                "name": preset.name,
                "description": preset.description,
            }
            for key, preset in cls.PRESETS.items()
        ]


# 便捷函数
def get_preset_config(preset: str) -> RunConfig:
    """按名称获取预设配置的便捷函数"""
    return ParameterPresets.get_run_config(PresetName(preset))


__all__ = [
    "PresetName",
    "ParameterPreset",
    "ParameterPresets",
    "get_preset_config",
]
