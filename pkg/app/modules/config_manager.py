"""
统一配置管理模块
解析 `section.key = value [unit]` 格式的运行配置，合并预设、配置文件、--set 覆盖与命令行参数，
并生成写入每个输出文件的参数快照
"""

import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from dotenv import load_dotenv

from .base_interfaces import (
    Command, ConfigurationError, GammaUnits, IDopplerIntegrator, InvalidParameterError,
    OutputFormat
)
from .core_types import MediumParams, ProbeParams, PumpParams, load_preset
from .doppler_average import AdaptiveQuadIntegrator, FixedNodeIntegrator, QuadratureConfig
from .pulse_propagation import GaussianPulseSpec, SamplingConfig
from app.utils.units import TWO_PI, split_value_unit, unit_factor

logger = logging.getLogger(__name__)

DEFAULT_PRESET = "rb87-vapor"
DEFAULT_PULSE_GAMMA = TWO_PI * 120e3   # 120 kHz 按普通频率读

LOG_LEVEL_ENV = "LAMBDIP_LOG_LEVEL"
LOG_DIR_ENV = "LAMBDIP_LOG_DIR"
LOG_FILE_ENV = "LAMBDIP_LOG_FILE"

_TRUE_WORDS = ("1", "true", "yes", "on")
_FALSE_WORDS = ("0", "false", "no", "off")


@dataclass
class LogConfig:
    """日志配置"""
    level: str = "INFO"
    console_output: bool = True
    file_output: bool = False
    log_dir: str = "data/Logs"
    max_file_size: int = 10 * 1024 * 1024  # 10MB
    max_files: int = 5
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @classmethod
    def from_env(cls) -> "LogConfig":
        """读取 LAMBDIP_LOG_* 环境变量"""
        config = cls()
        config.level = os.environ.get(LOG_LEVEL_ENV, config.level).upper()
        config.log_dir = os.environ.get(LOG_DIR_ENV, config.log_dir)
        flag = os.environ.get(LOG_FILE_ENV)
        if flag is not None:
            config.file_output = flag.strip().lower() in _TRUE_WORDS
        return config


@dataclass(frozen=True)
class SweepRange:
    """扫描网格：[start, stop] 上 points 个等距点"""
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.points < 1:
            raise InvalidParameterError("points 必须 ≥ 1")
        if self.points > 1 and not self.stop > self.start:
            raise InvalidParameterError("stop 必须大于 start")

    def grid(self) -> np.ndarray:
        if self.points == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.points)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class OptimizeSettings:
    """泵浦优化区间与透射率约束"""
    G_lo: float
    G_hi: float
    min_transmission: float = 0.0

    def __post_init__(self):
        if not 0 <= self.G_lo <= self.G_hi:
            raise InvalidParameterError("G_lo 与 G_hi 需满足 0 ≤ G_lo ≤ G_hi")
        if not 0 <= self.min_transmission <= 1:
            raise InvalidParameterError("min_transmission 必须在 [0, 1] 内")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SchemaEntry:
    """配置项说明：单位类别（text 表示字符串）与文档"""
    kind: str
    doc: str
    integer: bool = False
    choices: Tuple[str, ...] = ()


SCHEMA: Dict[str, SchemaEntry] = {
    # 介质
    "medium.density_N": SchemaEntry("density", "原子数密度 [cm^-3]"),
    "medium.T1": SchemaEntry("time", "纵向弛豫时间 [s, ms, us, ns]"),
    "medium.T2": SchemaEntry("time", "横向弛豫时间 [s, ms, us, ns]"),
    "medium.omega_1g": SchemaEntry("angular_frequency", "跃迁角频率 [rad/s, Hz..THz]"),
    "medium.mass_M": SchemaEntry("mass", "原子质量 [g, kg, u]"),
    "medium.temperature": SchemaEntry("temperature", "温度 [K]"),
    "medium.length_l": SchemaEntry("length", "介质长度 [cm, mm, m]"),
    # 泵浦与探测
    "pump.rabi_G": SchemaEntry("angular_frequency", "泵浦拉比频率 [rad/s, Hz..THz, gamma]"),
    "pump.detuning_Delta": SchemaEntry("angular_frequency", "泵浦失谐 Δ [rad/s, Hz..THz, gamma]"),
    "probe.detuning_delta": SchemaEntry("angular_frequency", "探测失谐 δ [rad/s, Hz..THz, gamma]"),
    "probe.modulation_index_m": SchemaEntry("dimensionless", "调制深度"),
    "probe.modulation_freq_nu": SchemaEntry("angular_frequency", "调制频率 ν [rad/s, Hz..THz, gamma]"),
    # 积分
    "quadrature.integration_halfwidth": SchemaEntry("dimensionless", "积分窗口半宽，以 D 为单位"),
    "quadrature.rel_tolerance": SchemaEntry("dimensionless", "相对容差"),
    "quadrature.max_subdivisions": SchemaEntry("dimensionless", "最大细分数", integer=True),
    # 扫描
    "sweep.start": SchemaEntry("angular_frequency", "扫描起点 [rad/s, Hz..THz, gamma]"),
    "sweep.stop": SchemaEntry("angular_frequency", "扫描终点 [rad/s, Hz..THz, gamma]"),
    "sweep.points": SchemaEntry("dimensionless", "扫描点数", integer=True),
    # 脉冲
    "pulse.Gamma": SchemaEntry("angular_frequency", "脉冲谱宽 Γ [rad/s, Hz..THz, gamma]"),
    "pulse.tau": SchemaEntry("time", "脉冲时域宽度 τ，缺省为 2/Γ [s, ms, us, ns]"),
    "pulse.carrier_delta": SchemaEntry("angular_frequency", "载波探测失谐 [rad/s, Hz..THz, gamma]"),
    "pulse.amplitude": SchemaEntry("dimensionless", "包络幅度 E0"),
    "pulse.samples": SchemaEntry("dimensionless", "FFT 采样点数（2 的幂）", integer=True),
    "pulse.window_halfwidth": SchemaEntry("angular_frequency", "频率半窗宽 [rad/s, Hz..THz, gamma]"),
    # 优化
    "optimize.G_lo": SchemaEntry("angular_frequency", "G 下界 [rad/s, Hz..THz, gamma]"),
    "optimize.G_hi": SchemaEntry("angular_frequency", "G 上界 [rad/s, Hz..THz, gamma]"),
    "optimize.min_transmission": SchemaEntry("dimensionless", "最小透射率"),
    # 运行
    "run.preset": SchemaEntry("text", "预设名，none 表示不使用预设"),
    "run.command": SchemaEntry("text", "子命令", choices=tuple(c.value for c in Command)),
    "run.output_path": SchemaEntry("text", "输出文件路径，缺省写到标准输出"),
    "run.output_format": SchemaEntry("text", "输出格式", choices=tuple(f.value for f in OutputFormat)),
    "run.workers": SchemaEntry("dimensionless", "工作进程数，0 为自动", integer=True),
    "run.gamma_units": SchemaEntry("text", "pulse.Gamma 中 Hz 族单位的读法",
                                   choices=tuple(g.value for g in GammaUnits)),
    "run.integrator": SchemaEntry("text", "多普勒积分器", choices=("adaptive", "fixed")),
    # 日志
    "log.level": SchemaEntry("text", "日志级别",
                             choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")),
    "log.file_output": SchemaEntry("text", "是否写日志文件", choices=_TRUE_WORDS + _FALSE_WORDS),
    "log.dir": SchemaEntry("text", "日志目录"),
}

# 各命令的默认扫描网格，以 γ 为单位
_DEFAULT_SWEEPS = {
    Command.SPECTRUM: (-20.0, 20.0, 401),
    Command.GROUPINDEX: (-2.0, 2.0, 201),
    Command.GSCAN: (0.05, 1.0, 40),
}


@dataclass
class RunConfig:
    """完全解析后的运行配置"""
    preset: Optional[str]
    medium: MediumParams
    pump: PumpParams
    probe: ProbeParams
    quadrature: QuadratureConfig
    sweep: SweepRange
    pulse: GaussianPulseSpec
    sampling: SamplingConfig
    optimize: OptimizeSettings
    log: LogConfig = field(default_factory=LogConfig)
    command: Optional[Command] = None
    output_path: Optional[str] = None
    output_format: OutputFormat = OutputFormat.CSV
    workers: Optional[int] = None
    gamma_units: GammaUnits = GammaUnits.ORDINARY
    integrator: str = "adaptive"
    overrides: Dict[str, str] = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        """均匀线宽 γ = 1/T2"""
        return self.medium.homogeneous_width

    def make_integrator(self) -> IDopplerIntegrator:
        if self.integrator == "fixed":
            return FixedNodeIntegrator()
        return AdaptiveQuadIntegrator(self.quadrature)

    def snapshot(self) -> Dict[str, Any]:
        """可复现本次运行的参数快照（不含时间戳）"""
        return {
            "preset": self.preset,
            "command": self.command.value if self.command else None,
            "medium": self.medium.to_dict(),
            "pump": self.pump.to_dict(),
            "probe": self.probe.to_dict(),
            "quadrature": self.quadrature.to_dict(),
            "integrator": self.integrator,
            "sweep": self.sweep.to_dict(),
            "pulse": self.pulse.to_dict(),
            "sampling": self.sampling.to_dict(),
            "optimize": self.optimize.to_dict(),
            "gamma_units": self.gamma_units.value,
            "gamma_rad_per_s": self.gamma,
            "overrides": dict(self.overrides),
        }


# 解析

@dataclass(frozen=True)
class _Entry:
    key: str
    raw: str
    location: str


def _scan_lines(text: str, label: str = "line") -> List[_Entry]:
    entries = []
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        entries.append(_parse_assignment(line, f"{label} {number}"))
    return entries


def _parse_assignment(line: str, location: str) -> _Entry:
    if "=" not in line:
        raise ConfigurationError("缺少 '='，格式应为 section.key = value [unit]", line=location)
    key, raw = (part.strip() for part in line.split("=", 1))
    if key not in SCHEMA:
        raise ConfigurationError("未知配置项", key=key, line=location)
    if not raw:
        raise ConfigurationError("缺少取值", key=key, line=location)
    return _Entry(key, raw, location)


class _Resolver:
    """按 key 取最终值；后出现的条目覆盖先出现的"""

    def __init__(self, entries: Iterable[_Entry]):
        self.entries: Dict[str, _Entry] = {}
        for entry in entries:
            self.entries[entry.key] = entry

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def text(self, key: str, default: Optional[str] = None) -> Optional[str]:
        entry = self.entries.get(key)
        if entry is None:
            return default
        choices = SCHEMA[key].choices
        value = entry.raw.upper() if key == "log.level" else entry.raw
        if choices and value not in choices and value.lower() not in choices:
            raise ConfigurationError(f"取值 '{entry.raw}' 不在 {list(choices)} 中",
                                     key=key, line=entry.location)
        return value

    def number(self, key: str, default: Optional[float] = None,
               gamma: Optional[float] = None, ordinary_hz: bool = True) -> Optional[float]:
        entry = self.entries.get(key)
        if entry is None:
            return default
        schema = SCHEMA[key]
        value_text, unit = split_value_unit(entry.raw)
        try:
            value = float(value_text)
        except ValueError:
            raise ConfigurationError(f"无法解析数值 '{value_text}'",
                                     key=key, line=entry.location) from None
        if not math.isfinite(value):
            raise ConfigurationError("数值必须有限", key=key, line=entry.location)
        try:
            factor = unit_factor(schema.kind, unit, gamma=gamma, ordinary_hz=ordinary_hz)
        except KeyError:
            raise ConfigurationError(f"单位 '{unit}' 不适用于 {schema.kind}",
                                     key=key, line=entry.location) from None
        value *= factor
        if schema.integer:
            if value != int(value):
                raise ConfigurationError("需要整数", key=key, line=entry.location)
            value = int(value)
        return value

    def location(self, key: str) -> Optional[str]:
        entry = self.entries.get(key)
        return entry.location if entry else None

    def section_values(self, section: str, names: Iterable[str], **kwargs) -> Dict[str, float]:
        values = {}
        for name in names:
            key = f"{section}.{name}"
            if key in self:
                values[name] = self.number(key, **kwargs)
        return values

    def build(self, section: str, factory, values: Mapping[str, Any]):
        """构造参数对象，把不变量违反转为指明配置项的错误"""
        try:
            return factory(**values)
        except InvalidParameterError as e:
            key = next((f"{section}.{name}" for name in values if name in str(e)),
                       next((f"{section}.{name}" for name in values), section))
            raise ConfigurationError(str(e), key=key, line=self.location(key)) from None


def _field_names(cls) -> List[str]:
    return [f.name for f in fields(cls) if f.init]


def parse_config(text: str = "", overrides: Sequence[str] = (),
                 command: Optional[Command] = None,
                 flags: Optional[Mapping[str, str]] = None) -> RunConfig:
    """解析配置文本

    合并顺序：预设 → text → overrides（--set，标记为 "--set #k"）→ flags（命令行参数）。
    未知配置项、单位不符、数值错误与不变量违反均抛出 ConfigurationError。
    """
    entries = _scan_lines(text)
    for index, item in enumerate(overrides, start=1):
        entries.append(_parse_assignment(item.strip(), f"--set #{index}"))
    for key, value in (flags or {}).items():
        if value is not None:
            entries.append(_parse_assignment(f"{key} = {value}", f"flag {key}"))
    resolver = _Resolver(entries)

    # 预设与介质
    preset = resolver.text("run.preset", DEFAULT_PRESET)
    if preset and preset.lower() == "none":
        preset = None
    medium_values = resolver.section_values("medium", _field_names(MediumParams))
    if preset:
        try:
            base_medium, base_pump, base_probe = load_preset(preset)
        except InvalidParameterError as e:
            raise ConfigurationError(str(e), key="run.preset",
                                     line=resolver.location("run.preset")) from None
        medium = resolver.build("medium", partial_replace(base_medium), medium_values)
    else:
        missing = [n for n in _field_names(MediumParams) if n not in medium_values]
        if missing:
            raise ConfigurationError(f"未使用预设时必须给出 medium.{', medium.'.join(missing)}",
                                     key=f"medium.{missing[0]}")
        base_pump, base_probe = PumpParams(), ProbeParams()
        medium = resolver.build("medium", MediumParams, medium_values)
    gamma = medium.homogeneous_width

    pump = resolver.build("pump", partial_replace(base_pump),
                          resolver.section_values("pump", _field_names(PumpParams), gamma=gamma))
    probe = resolver.build("probe", partial_replace(base_probe),
                           resolver.section_values("probe", _field_names(ProbeParams), gamma=gamma))
    quadrature = resolver.build("quadrature", QuadratureConfig,
                                resolver.section_values("quadrature", _field_names(QuadratureConfig)))

    # 运行选项
    command_text = resolver.text("run.command")
    if command is None and command_text:
        command = Command(command_text.lower())
    gamma_units = GammaUnits(resolver.text("run.gamma_units", GammaUnits.ORDINARY.value).lower())
    output_format = OutputFormat(resolver.text("run.output_format", OutputFormat.CSV.value).lower())
    integrator = resolver.text("run.integrator", "adaptive").lower()
    workers = resolver.number("run.workers")

    # 扫描网格
    start_g, stop_g, points = _DEFAULT_SWEEPS.get(command, _DEFAULT_SWEEPS[Command.SPECTRUM])
    sweep = resolver.build("sweep", SweepRange, {
        "start": resolver.number("sweep.start", start_g * gamma, gamma=gamma),
        "stop": resolver.number("sweep.stop", stop_g * gamma, gamma=gamma),
        "points": resolver.number("sweep.points", points),
    })

    # 脉冲
    pulse_gamma = resolver.number("pulse.Gamma", DEFAULT_PULSE_GAMMA, gamma=gamma,
                                  ordinary_hz=gamma_units is GammaUnits.ORDINARY)
    pulse = resolver.build("pulse", GaussianPulseSpec, {
        "Gamma": pulse_gamma,
        "tau": resolver.number("pulse.tau", 2.0 / pulse_gamma if pulse_gamma else float("nan")),
        "carrier_delta": resolver.number("pulse.carrier_delta", 0.0, gamma=gamma),
        "amplitude": resolver.number("pulse.amplitude", 1.0),
    })
    sampling_values = {"samples": resolver.number("pulse.samples", SamplingConfig.samples)}
    if "pulse.window_halfwidth" in resolver:
        sampling_values["window_halfwidth"] = resolver.number("pulse.window_halfwidth", gamma=gamma)
    sampling = resolver.build("pulse", SamplingConfig, sampling_values)

    optimize = resolver.build("optimize", OptimizeSettings, {
        "G_lo": resolver.number("optimize.G_lo", 0.3 * gamma, gamma=gamma),
        "G_hi": resolver.number("optimize.G_hi", 0.5 * gamma, gamma=gamma),
        "min_transmission": resolver.number("optimize.min_transmission", 0.0),
    })

    log = LogConfig.from_env()
    log.level = resolver.text("log.level", log.level)
    log.log_dir = resolver.text("log.dir", log.log_dir)
    file_flag = resolver.text("log.file_output")
    if file_flag is not None:
        log.file_output = file_flag.lower() in _TRUE_WORDS

    return RunConfig(
        preset=preset,
        medium=medium,
        pump=pump,
        probe=probe,
        quadrature=quadrature,
        sweep=sweep,
        pulse=pulse,
        sampling=sampling,
        optimize=optimize,
        log=log,
        command=command,
        output_path=resolver.text("run.output_path"),
        output_format=output_format,
        workers=workers,
        gamma_units=gamma_units,
        integrator=integrator,
        overrides={key: entry.raw for key, entry in resolver.entries.items()},
    )


def partial_replace(base):
    """返回以 base 为默认值的构造函数"""
    def factory(**values):
        return replace(base, **values)
    return factory


def describe_schema() -> List[Tuple[str, str]]:
    """(key, 文档) 列表，供帮助信息使用"""
    return [(key, entry.doc) for key, entry in SCHEMA.items()]


class ConfigManager:
    """配置管理器

    负责读取 .env 与配置文件，并把命令行参数折叠成最终的 RunConfig。
    """

    def __init__(self, config_file: Optional[str] = None, env_file: Optional[str] = None):
        self.config_file = Path(config_file) if config_file else None
        self.env_file = env_file
        self._config: Optional[RunConfig] = None

    def load_env(self) -> bool:
        """加载 .env（不覆盖已有环境变量）"""
        loaded = load_dotenv(self.env_file, override=False) if self.env_file else load_dotenv(override=False)
        if loaded:
            logger.debug("已加载 .env 环境变量")
        return bool(loaded)

    def read_config_text(self) -> str:
        if self.config_file is None:
            return ""
        try:
            return self.config_file.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"无法读取配置文件 {self.config_file}: {e}") from None

    def load(self, command: Optional[Command] = None, overrides: Sequence[str] = (),
             flags: Optional[Mapping[str, str]] = None) -> RunConfig:
        """合并所有来源并校验"""
        self.load_env()
        text = self.read_config_text()
        self._config = parse_config(text, overrides=overrides, command=command, flags=flags)
        cfg = self._config
        logger.info(f"配置加载成功: 预设 {cfg.preset or '无'}, "
                    f"γ={cfg.gamma:.6g} rad/s, D={cfg.medium.doppler_width:.6g} rad/s")
        return cfg

    @property
    def config(self) -> RunConfig:
        if self._config is None:
            raise ConfigurationError("配置尚未加载")
        return self._config

    def get_snapshot(self) -> Dict[str, Any]:
        return self.config.snapshot()
