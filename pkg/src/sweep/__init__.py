"""
RNStab 扫描模块
"""

from .runner import RangeSpec, SweepSpec, SweepRecord, run_stability_map, run_accuracy_scan
from .report import ReportError, emit_report, render_report

__all__ = [
    "RangeSpec",
    "SweepSpec",
    "SweepRecord",
    "run_stability_map",
    "run_accuracy_scan",
    "ReportError",
    "emit_report",
    "render_report",
]
