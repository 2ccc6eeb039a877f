"""
核心物理参数
介质、泵浦、探测光的不可变参数对象，偶极矩标定与多普勒宽度
单位：高斯制（cgs），角频率均为 rad/s
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Tuple

from app.modules.base_interfaces import InvalidParameterError
from app.utils.units import (
    ATOMIC_MASS_UNIT, C_LIGHT, HBAR, K_BOLTZMANN, wavelength_to_omega
)

logger = logging.getLogger(__name__)


def _require_positive(name: str, value: float):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} 必须为正的有限数，实际为 {value!r}")


def calibrate_prefactor(density: float, T1: float, omega_1g: float) -> float:
    """磁化率前因子 C = N|d|²/ħ

    偶极矩由二能级原子的自发辐射率 1/T1 反推：|d|² = 3ħc³/(4ω³T1)。
    """
    _require_positive("T1", T1)
    _require_positive("omega_1g", omega_1g)
    if not (math.isfinite(density) and density >= 0):
        raise InvalidParameterError(f"density_N 不能为负，实际为 {density!r}")
    dipole_sq = 3.0 * HBAR * C_LIGHT ** 3 / (4.0 * omega_1g ** 3 * T1)
    return density * dipole_sq / HBAR


def doppler_width(temperature: float, mass: float, omega: float) -> float:
    """多普勒宽度 D = sqrt(k_B·T·ω²/(M·c²))"""
    _require_positive("temperature", temperature)
    _require_positive("mass_M", mass)
    _require_positive("omega", omega)
    return math.sqrt(K_BOLTZMANN * temperature * omega ** 2 / (mass * C_LIGHT ** 2))


@dataclass(frozen=True)
class MediumParams:
    """原子介质参数"""
    density_N: float        # cm^-3
    T1: float               # s
    T2: float               # s
    omega_1g: float         # rad/s
    mass_M: float           # g
    temperature: float      # K
    length_l: float         # cm
    prefactor_C: float = field(init=False)  # rad/s，构造时导出

    def __post_init__(self):
        _require_positive("T2", self.T2)
        _require_positive("length_l", self.length_l)
        _require_positive("temperature", self.temperature)
        _require_positive("mass_M", self.mass_M)
        object.__setattr__(
            self, "prefactor_C", calibrate_prefactor(self.density_N, self.T1, self.omega_1g)
        )

    @property
    def doppler_width(self) -> float:
        return doppler_width(self.temperature, self.mass_M, self.omega_1g)

    @property
    def homogeneous_width(self) -> float:
        """均匀线宽 1/T2"""
        return 1.0 / self.T2

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["doppler_width_D"] = self.doppler_width
        return data


@dataclass(frozen=True)
class PumpParams:
    """饱和泵浦光参数"""
    rabi_G: float = 0.0            # rad/s
    detuning_Delta: float = 0.0    # Δ = ω_c − ω_1g，rad/s

    def __post_init__(self):
        if not (math.isfinite(self.rabi_G) and self.rabi_G >= 0):
            raise InvalidParameterError(f"rabi_G 不能为负，实际为 {self.rabi_G!r}")
        if not math.isfinite(self.detuning_Delta):
            raise InvalidParameterError("detuning_Delta 必须为有限数")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ProbeParams:
    """探测光参数"""
    detuning_delta: float = 0.0        # δ = ω − ω_c，rad/s
    modulation_index_m: float = 0.0
    modulation_freq_nu: float = 0.0    # rad/s

    def __post_init__(self):
        if not (math.isfinite(self.modulation_index_m) and self.modulation_index_m >= 0):
            raise InvalidParameterError(
                f"modulation_index_m 不能为负，实际为 {self.modulation_index_m!r}"
            )
        if not (math.isfinite(self.detuning_delta) and math.isfinite(self.modulation_freq_nu)):
            raise InvalidParameterError("探测光失谐与调制频率必须为有限数")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# 87Rb 预设

RB87_GAMMA = 3.0 * math.pi * 1e6          # rad/s
RB87_WAVELENGTH_CM = 780.24e-7            # D2 线
RB87_MASS_G = 87 * 1.6605e-24


def rb87_vapor() -> Tuple[MediumParams, PumpParams, ProbeParams]:
    """87Rb 室温蒸气：T1 = T2/2 = 1/(2γ)，N = 2e11 cm^-3，l = 1 cm，G = 0.4γ 共振泵浦"""
    T1 = 1.0 / (2.0 * RB87_GAMMA)
    medium = MediumParams(
        density_N=2e11,
        T1=T1,
        T2=2.0 * T1,
        omega_1g=wavelength_to_omega(RB87_WAVELENGTH_CM),
        mass_M=RB87_MASS_G,
        temperature=300.0,
        length_l=1.0,
    )
    pump = PumpParams(rabi_G=0.4 * RB87_GAMMA, detuning_Delta=0.0)
    return medium, pump, ProbeParams()


PRESETS: Dict[str, Callable[[], Tuple[MediumParams, PumpParams, ProbeParams]]] = {
    "rb87-paper": rb87_vapor,
    "rb87-vapor": rb87_vapor,     # 别名
}


def load_preset(name: str) -> Tuple[MediumParams, PumpParams, ProbeParams]:
    """按名称加载预设"""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise InvalidParameterError(
            f"未知预设 '{name}'，可用: {', '.join(sorted(PRESETS))}"
        ) from None
    logger.debug(f"加载预设: {name}")
    return factory()


__all__ = [
    "MediumParams", "PumpParams", "ProbeParams", "calibrate_prefactor", "doppler_width",
    "rb87_vapor", "load_preset", "PRESETS", "RB87_GAMMA", "ATOMIC_MASS_UNIT",
]
