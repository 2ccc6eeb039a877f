"""
结果输出服务
把谱、扫描、脉冲波形与优化结果写成 CSV 或 JSON，每个文件都嵌入完整参数快照

CSV 数值以 17 位有效数字写出；JSON 使用 Python 浮点 repr（最短可精确往返的表示）。
生成时间只出现在 generated_at 字段中，其余内容对相同配置逐字节一致。
"""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.modules.base_interfaces import OutputColumn, OutputError, OutputFormat, SweepVariable
from app.modules.core_types import MediumParams, PumpParams
from app.modules.dispersion import assemble_point
from app.modules.doppler_average import ComplexSpectrum
from app.modules.pulse_propagation import PropagationResult
from app.modules.sweep_optimize import OptimizationResult, SweepResult

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = [
    "delta_rad_per_s", "re_S", "im_S", "n_g", "theta_s", "attenuation_exponent", "transmission",
]
PULSE_COLUMNS = ["t_s", "intensity_vacuum", "intensity_medium"]
OPTIMIZE_COLUMNS = [
    "rabi_G_rad_per_s", "n_g", "transmission", "attenuation_exponent", "theta_s",
    "constraint_active", "evaluations",
]
SWEEP_VARIABLE_COLUMNS = {
    SweepVariable.PUMP_RABI: "rabi_G_rad_per_s",
    SweepVariable.PUMP_DETUNING: "pump_detuning_rad_per_s",
}

# 扫描输出列 -> 对应的 CSV 列
_OUTPUT_COLUMN_MAP = {
    OutputColumn.S: ("re_S", "im_S"),
    OutputColumn.N_G: ("n_g",),
    OutputColumn.THETA: ("theta_s",),
    OutputColumn.TRANSMISSION: ("attenuation_exponent", "transmission"),
}


@dataclass
class OutputTable:
    """列名、数据行以及表外的标量结果"""
    columns: List[str]
    rows: List[List[Any]]
    extra: Dict[str, Any] = field(default_factory=dict)


def _medium_from_metadata(data: Dict[str, Any]) -> MediumParams:
    names = ("density_N", "T1", "T2", "omega_1g", "mass_M", "temperature", "length_l")
    return MediumParams(**{name: data[name] for name in names})


def table_from_spectrum(spectrum: ComplexSpectrum) -> OutputTable:
    """谱扫描只有 S，n_g 与 θ 留空"""
    medium = _medium_from_metadata(spectrum.metadata["medium"])
    pump = PumpParams(**spectrum.metadata["pump"])
    rows = []
    for delta, S in zip(spectrum.delta_grid, spectrum.S_values):
        point = assemble_point(float(delta), complex(S), complex("nan+nanj"), pump, medium)
        rows.append([point.delta, point.S.real, point.S.imag, None, None,
                     point.attenuation_exponent, point.transmission])
    extra = {"integrator": spectrum.metadata.get("integrator")}
    return OutputTable(list(SPECTRUM_COLUMNS), rows, extra)


def table_from_sweep(result: SweepResult) -> OutputTable:
    spec = result.spec
    requested = set()
    for column in spec.outputs:
        requested.update(_OUTPUT_COLUMN_MAP[column])
    variable_column = SWEEP_VARIABLE_COLUMNS.get(spec.variable)
    columns = ([variable_column] if variable_column else []) + SPECTRUM_COLUMNS + ["error"]

    rows = []
    for row in result.rows:
        values = {name: None for name in SPECTRUM_COLUMNS}
        values["delta_rad_per_s"] = row.delta
        point = row.point
        if point is not None:
            candidates = {
                "re_S": point.S.real,
                "im_S": point.S.imag,
                "n_g": point.n_g,
                "theta_s": point.theta,
                "attenuation_exponent": point.attenuation_exponent,
                "transmission": point.transmission,
            }
            for name, value in candidates.items():
                if name in requested:
                    values[name] = value
        line = [row.value] if variable_column else []
        line.extend(values[name] for name in SPECTRUM_COLUMNS)
        line.append(row.error)
        rows.append(line)
    extra = {"sweep_variable": spec.variable.value,
             "outputs": [column.value for column in spec.outputs]}
    return OutputTable(columns, rows, extra)


def table_from_propagation(result: PropagationResult) -> OutputTable:
    rows = [[float(t), float(iv), float(im)] for t, iv, im in
            zip(result.time_grid, result.intensity_vacuum, result.intensity_medium)]
    extra = {
        "measured_delay": result.measured_delay,
        "measured_transmission": result.measured_transmission,
        "peak_delay": result.peak_delay,
        "energy_transmission": result.energy_transmission,
        "delay_method": result.delay_method,
        "transmission_method": result.transmission_method,
        "parseval_error": result.parseval_error,
        "spectral_width_ratio": result.spectral_width_ratio,
        "propagation": result.metadata,
    }
    return OutputTable(list(PULSE_COLUMNS), rows, extra)


def table_from_optimization(result: OptimizationResult) -> OutputTable:
    row = [result.rabi_G, result.n_g, result.transmission, result.attenuation_exponent,
           result.theta, result.constraint_active, result.evaluations]
    return OutputTable(list(OPTIMIZE_COLUMNS), [row])


def to_table(results: Any) -> OutputTable:
    if isinstance(results, OutputTable):
        return results
    if isinstance(results, ComplexSpectrum):
        return table_from_spectrum(results)
    if isinstance(results, SweepResult):
        return table_from_sweep(results)
    if isinstance(results, PropagationResult):
        return table_from_propagation(results)
    if isinstance(results, OptimizationResult):
        return table_from_optimization(results)
    raise TypeError(f"不支持的结果类型: {type(results).__name__}")


# 序列化

def _format_csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.17g}"
    return str(value)


def _json_safe(value: Any) -> Any:
    """NaN/inf 不是合法 JSON，写成 null；numpy 标量转为 Python 数"""
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    return value


def render_csv(table: OutputTable, snapshot: Dict[str, Any], generated_at: str) -> str:
    buffer = io.StringIO()
    buffer.write(f"# generated_at: {generated_at}\n")
    buffer.write(f"# parameters: {json.dumps(_json_safe(snapshot), sort_keys=True)}\n")
    if table.extra:
        buffer.write(f"# results: {json.dumps(_json_safe(table.extra), sort_keys=True)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_csv_value(v) for v in row])
    return buffer.getvalue()


def render_json(table: OutputTable, snapshot: Dict[str, Any], generated_at: str) -> str:
    document = {
        "generated_at": generated_at,
        "parameters": snapshot,
        "columns": table.columns,
        "rows": table.rows,
        "results": table.extra,
    }
    return json.dumps(_json_safe(document), sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def emit(results: Any, fmt: OutputFormat, path: Optional[str], snapshot: Dict[str, Any],
         generated_at: Optional[str] = None) -> str:
    """写出结果；path 为 None 时写到标准输出，返回写出的文本"""
    fmt = OutputFormat(fmt)
    table = to_table(results)
    generated_at = generated_at or datetime.now().isoformat(timespec="seconds")
    if fmt is OutputFormat.JSON:
        text = render_json(table, snapshot, generated_at)
    else:
        text = render_csv(table, snapshot, generated_at)

    if path is None:
        sys.stdout.write(text)
        return text
    try:
        with open(Path(path), "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(f"无法写入输出文件 {path}: {e}") from None
    logger.info(f"结果已写入: {path}（{len(table.rows)} 行, {fmt.value}）")
    return text


def read_json(path: str) -> Dict[str, Any]:
    """读取 emit 写出的 JSON 文件"""
    try:
        with open(Path(path), "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise OutputError(f"无法读取 {path}: {e}") from None


def read_csv_rows(path: str) -> List[Dict[str, str]]:
    """读取 emit 写出的 CSV 数据行（跳过 # 开头的元数据行）"""
    try:
        with open(Path(path), "r", encoding="utf-8", newline="") as f:
            lines = [line for line in f if not line.startswith("#")]
    except OSError as e:
        raise OutputError(f"无法读取 {path}: {e}") from None
    return list(csv.DictReader(lines))
