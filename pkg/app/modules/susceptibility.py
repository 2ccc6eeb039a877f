"""
单速度群的泵浦缀饰探测磁化率
Mollow 有效磁化率及其对探测-泵浦失谐的解析导数，含对向传播的多普勒频移规则
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.modules.base_interfaces import NumericRangeError
from app.modules.core_types import MediumParams

logger = logging.getLogger(__name__)

# 超过此量级的失谐视为非法输入
MAX_DETUNING = 1e18


@dataclass(frozen=True)
class VelocityClassInput:
    """速度群 kv 下的有效失谐"""
    Delta_v: float   # Δ + kv
    delta_v: float   # δ − 2kv


def velocity_shift(Delta: float, delta: float, kv: float) -> VelocityClassInput:
    """ω_c → ω_c + kv，ω → ω − kv

    泵浦与探测对向传播，δ = ω − ω_c 因此获得 −2kv。
    """
    return VelocityClassInput(Delta_v=Delta + kv, delta_v=delta - 2.0 * kv)


def _check_range(*values):
    for value in values:
        if np.any(~np.isfinite(value)) or np.any(np.abs(value) > MAX_DETUNING):
            raise NumericRangeError(
                f"失谐量级超出范围（需有限且 |x| ≤ {MAX_DETUNING:.0e} rad/s）"
            )


def chi_core(Delta, delta, G, C, T1, T2):
    """按原式逐项转写，标量与 numpy 数组均可"""
    g2 = G * G
    sat = 1.0 + Delta * Delta * T2 * T2
    prefactor = -C * sat / ((sat + 4.0 * g2 * T1 * T2) * (Delta + delta + 1j / T2))
    numerator = 2.0 * g2 * (1.0 / (Delta - 1j / T2)) * (delta + 2j / T2) * (delta - Delta + 1j / T2)
    denominator = ((delta + 1j / T1) * (delta + Delta + 1j / T2) * (delta - Delta + 1j / T2)
                   - 4.0 * g2 * (delta + 2j / T2))
    return prefactor * (1.0 - numerator / denominator)


def dchi_core(Delta, delta, G, C, T1, T2):
    """chi_core 在固定 Δ 下对 δ 的解析偏导"""
    g2 = G * G
    sat = 1.0 + Delta * Delta * T2 * T2
    amplitude = -C * sat / (sat + 4.0 * g2 * T1 * T2)
    line = Delta + delta + 1j / T2
    prefactor = amplitude / line
    d_prefactor = -amplitude / (line * line)

    k = 2.0 * g2 * (1.0 / (Delta - 1j / T2))
    u = delta + 2j / T2
    r = delta - Delta + 1j / T2
    numerator = k * u * r
    d_numerator = k * (r + u)

    p = delta + 1j / T1
    q = delta + Delta + 1j / T2
    denominator = p * q * r - 4.0 * g2 * u
    d_denominator = q * r + p * r + p * q - 4.0 * g2

    bracket = 1.0 - numerator / denominator
    d_bracket = -(d_numerator * denominator - numerator * d_denominator) / (denominator * denominator)
    return d_prefactor * bracket + prefactor * d_bracket


def chi_mollow(inp: VelocityClassInput, rabi_G: float, medium: MediumParams) -> complex:
    """单速度群的复磁化率 χ（无量纲）"""
    _check_range(inp.Delta_v, inp.delta_v, rabi_G)
    return chi_core(inp.Delta_v, inp.delta_v, rabi_G,
                    medium.prefactor_C, medium.T1, medium.T2)


def dchi_ddelta(inp: VelocityClassInput, rabi_G: float, medium: MediumParams) -> complex:
    """∂χ/∂δ_v（固定 Δ_v），单位 (rad/s)^-1"""
    _check_range(inp.Delta_v, inp.delta_v, rabi_G)
    return dchi_core(inp.Delta_v, inp.delta_v, rabi_G,
                     medium.prefactor_C, medium.T1, medium.T2)
