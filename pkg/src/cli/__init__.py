"""
RNStab 命令行模块
"""

from .main import main, build_parser

__all__ = ["main", "build_parser"]
