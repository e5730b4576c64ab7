"""
RNStab 配置模块
"""

from .settings import Settings, RunConfig, load_run_config, setup_logging, settings
from .presets import PresetName, ParameterPresets, get_preset_config

__all__ = [
    "Settings",
    "RunConfig",
    "load_run_config",
    "setup_logging",
    "settings",
    "PresetName",
    "ParameterPresets",
    "get_preset_config",
]
