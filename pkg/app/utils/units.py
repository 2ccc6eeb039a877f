"""
单位换算工具
所有内部量统一为高斯单位制（cgs）：角频率 rad/s、长度 cm、质量 g、时间 s
"""

import math
from typing import Dict, Optional, Tuple

from scipy import constants as _si

# CODATA 常数换算到 cgs
HBAR = _si.hbar * 1e7            # erg·s
C_LIGHT = _si.c * 1e2            # cm/s
K_BOLTZMANN = _si.k * 1e7        # erg/K
ATOMIC_MASS_UNIT = _si.m_u * 1e3  # g

TWO_PI = 2.0 * math.pi

# 单位类别 -> {单位名: 换算系数}
UNIT_TABLE: Dict[str, Dict[str, float]] = {
    "angular_frequency": {
        "rad/s": 1.0,
        "Hz": TWO_PI,
        "kHz": TWO_PI * 1e3,
        "MHz": TWO_PI * 1e6,
        "GHz": TWO_PI * 1e9,
        "THz": TWO_PI * 1e12,
    },
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "length": {"cm": 1.0, "mm": 0.1, "m": 100.0},
    "mass": {"g": 1.0, "kg": 1e3, "u": ATOMIC_MASS_UNIT},
    "density": {"cm^-3": 1.0},
    "temperature": {"K": 1.0},
    "dimensionless": {"": 1.0},
}

CANONICAL_UNIT = {
    "angular_frequency": "rad/s",
    "time": "s",
    "length": "cm",
    "mass": "g",
    "density": "cm^-3",
    "temperature": "K",
    "dimensionless": "",
}

# 以 γ=1/T2 为单位的频率，需要介质参数才能换算
GAMMA_UNIT = "gamma"
ORDINARY_FREQUENCY_UNITS = ("Hz", "kHz", "MHz", "GHz", "THz")


def wavelength_to_omega(wavelength_cm: float) -> float:
    """真空波长 -> 角频率"""
    return TWO_PI * C_LIGHT / wavelength_cm


def split_value_unit(text: str) -> Tuple[str, str]:
    """把 '0.4 gamma' 拆成 ('0.4', 'gamma')"""
    parts = text.strip().split(None, 1)
    if not parts:
        return "", ""
    if len(parts) == 1:
        return parts[0], ""
    return parts[0], parts[1].strip()


def unit_factor(kind: str, unit: str, gamma: Optional[float] = None,
                ordinary_hz: bool = True) -> float:
    """返回把 unit 换算到内部单位的系数

    kind 不接受该单位时抛出 KeyError，调用方负责包装成配置错误。
    ordinary_hz=False 时 Hz 族单位按 rad/s 的数量级读（只用于脉冲谱宽Γ）。
    """
    if not unit:
        unit = CANONICAL_UNIT[kind]
    if kind == "angular_frequency" and unit == GAMMA_UNIT:
        if gamma is None:
            raise KeyError(unit)
        return gamma
    factor = UNIT_TABLE[kind][unit]
    if kind == "angular_frequency" and unit in ORDINARY_FREQUENCY_UNITS and not ordinary_hz:
        factor /= TWO_PI
    return factor
