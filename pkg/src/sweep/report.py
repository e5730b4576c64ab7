"""
RNStab 报告输出
扫描记录写为 CSV (固定表头，17 位有效数字) 或 JSON；相同输入产生相同字节
"""

import json
import math
from dataclasses import is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd
from loguru import logger

from ..config.settings import settings
from .runner import SWEEP_COLUMNS, SweepRecord, AccuracyRecord


SWEEP_HEADER = ",".join(SWEEP_COLUMNS)

# 可空整数列
_OPTIONAL_INT_COLUMNS = ("blow_up_step", "worst_mode", "n_modes", "index", "step")


class ReportFormat(str, Enum):
    """报告格式"""
    CSV = "csv"
    JSON = "json"


class ReportError(OSError):
    """报告写入失败"""

    def __init__(self, path: Union[str, Path], reason: str):
        self.path = str(path)
        super().__init__(f"cannot write report to {self.path}: {reason}")


def _to_row(record: Any) -> Dict[str, Any]:
    if isinstance(record, AccuracyRecord):
        row = {
            "alpha": record.alpha,
            "error": record.error,
            "stable": record.stable,
            "blow_up_step": record.blow_up_step,
        }
        for i, value in enumerate(record.per_mode_error, start=1):
            row[f"mode_{i}_error"] = value
        return row
    if is_dataclass(record) and hasattr(record, "to_dict"):
        return record.to_dict()
    if isinstance(record, dict):
        return dict(record)
    raise TypeError(f"unsupported record type: {type(record).__name__}")


def records_frame(records: Sequence[Any]) -> pd.DataFrame:
    """记录转为 DataFrame；稳定性记录使用固定列顺序"""
    if not records:
        raise ValueError("no records to report")

    frame = pd.DataFrame([_to_row(r) for r in records])
    if isinstance(records[0], SweepRecord):
        frame = frame[SWEEP_COLUMNS]
    for column in _OPTIONAL_INT_COLUMNS:
        if column in frame.columns and frame[column].dtype != bool:
            frame[column] = frame[column].astype("Int64")
    return frame


def _clean(value: Any) -> Any:
    # JSON 中 NaN 写为 null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {key: _clean(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def render_document(data: Any, fmt: Union[str, ReportFormat] = ReportFormat.JSON) -> str:
    """渲染单个结果对象 (根、阈值等)；CSV 时含 rows 的对象按行输出，否则输出 key,value 两列"""
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        return json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n"

    if isinstance(data, dict) and isinstance(data.get("rows"), list) and data["rows"]:
        frame = pd.DataFrame(data["rows"])
    elif isinstance(data, list):
        frame = pd.DataFrame(data)
    else:
        frame = pd.DataFrame(
            [{"key": key, "value": value} for key, value in (data or {}).items()
             if not isinstance(value, (dict, list))]
        )
    return frame.to_csv(index=False, float_format=settings.csv_float_format, lineterminator="\n", na_rep="")


def render_report(records: Sequence[Any], fmt: Union[str, ReportFormat] = ReportFormat.CSV) -> str:
    """渲染记录列表"""
    fmt = ReportFormat(fmt)
    if fmt is ReportFormat.JSON:
        return json.dumps([_clean(_to_row(r)) for r in records], indent=2, ensure_ascii=False) + "\n"
    frame = records_frame(records)
    return frame.to_csv(index=False, float_format=settings.csv_float_format, lineterminator="\n", na_rep="")


def write_text(text: str, path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """写入文件；path 为空时写到标准输出"""
    if path is None:
        print(text, end="")
        return None

    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportError(path, e.strerror or str(e)) from e
    logger.info(f"Report written: {path}")
    return path


def emit_report(records: Sequence[Any], fmt: Union[str, ReportFormat] = ReportFormat.CSV,
                path: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """渲染并写出记录"""
    if not records:
        raise ValueError("no records to report")
    return write_text(render_report(records, fmt), path)


def read_sweep_csv(path: Union[str, Path]) -> List[SweepRecord]:
    """读回稳定性图 CSV"""
    frame = pd.read_csv(path, dtype={"classification": str}, float_precision="round_trip")
    if list(frame.columns) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected header: {','.join(frame.columns)}")

    records = []
    for row in frame.to_dict(orient="records"):
        growth = row["empirical_growth"]
        blow_up = row["blow_up_step"]
        records.append(SweepRecord(
            alpha=float(row["alpha"]),
            dt=float(row["dt"]),
            n_modes=int(row["n_modes"]),
            spectral_radius=float(row["spectral_radius"]),
            worst_mode=int(row["worst_mode"]),
            classification=str(row["classification"]),
            gamma_max=float(row["gamma_max"]),
            instability_sufficient=bool(row["instability_sufficient"]),
            empirical_growth=None if pd.isna(growth) else float(growth),
            blow_up_step=None if pd.isna(blow_up) else int(blow_up),
        ))
    return records


__all__ = [
    "SWEEP_HEADER",
    "ReportFormat",
    "ReportError",
    "records_frame",
    "render_document",
    "render_report",
    "write_text",
    "emit_report",
    "read_sweep_csv",
]
