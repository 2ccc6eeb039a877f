"""
色散量
由 S(ω) 及其导数求群折射率、群速度、延迟时间与衰减
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from app.modules.base_interfaces import IDopplerIntegrator
from app.modules.core_types import MediumParams, PumpParams
from app.modules.doppler_average import QuadratureConfig, average_dS_domega, average_S
from app.utils.units import C_LIGHT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DispersionPoint:
    """单个探测失谐处的色散量"""
    delta: float                 # rad/s
    S: complex
    dS_domega: complex           # (rad/s)^-1
    n_g: float
    group_velocity: float        # cm/s
    theta: float                 # s
    attenuation_exponent: float  # 强度衰减指数
    transmission: float

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["S"] = [self.S.real, self.S.imag]
        data["dS_domega"] = [self.dS_domega.real, self.dS_domega.imag]
        return data


def probe_omega(delta: float, pump: PumpParams, medium: MediumParams) -> float:
    """探测光实际角频率 ω = ω_1g + Δ + δ"""
    return medium.omega_1g + pump.detuning_Delta + delta


def attenuation_exponent(S: complex, omega: float, medium: MediumParams) -> float:
    """强度衰减指数 Im[4π·l·ω·S/c]"""
    return (4.0 * math.pi * medium.length_l * omega * S / C_LIGHT).imag


def group_index_from(S: complex, dS: complex, omega: float) -> float:
    """n_g = 1 + 2π·Re S + 2π·ω·∂Re S/∂ω"""
    return 1.0 + 2.0 * math.pi * S.real + 2.0 * math.pi * omega * dS.real


def delay_from(dS: complex, omega: float, medium: MediumParams) -> float:
    """θ = 2π·l·(ω/c)·∂Re S/∂ω"""
    return 2.0 * math.pi * medium.length_l * (omega / C_LIGHT) * dS.real


def assemble_point(delta: float, S: complex, dS: complex, pump: PumpParams,
                   medium: MediumParams) -> DispersionPoint:
    """由 S 与 ∂S/∂ω 组装全部派生量"""
    omega = probe_omega(delta, pump, medium)
    n_g = group_index_from(S, dS, omega)
    exponent = attenuation_exponent(S, omega, medium)
    return DispersionPoint(
        delta=delta,
        S=S,
        dS_domega=dS,
        n_g=n_g,
        group_velocity=C_LIGHT / n_g,
        theta=delay_from(dS, omega, medium),
        attenuation_exponent=exponent,
        transmission=math.exp(-exponent),
    )


def dispersion_point(delta: float, pump: PumpParams, medium: MediumParams,
                     quad: Optional[QuadratureConfig] = None,
                     integrator: Optional[IDopplerIntegrator] = None) -> DispersionPoint:
    """一次积分同时给出 n_g、θ 与透射率"""
    S = average_S(delta, pump, medium, quad, integrator)
    dS = average_dS_domega(delta, pump, medium, quad, integrator)
    point = assemble_point(delta, S, dS, pump, medium)
    logger.debug(f"δ={delta:.6g}: n_g={point.n_g:.6g}, θ={point.theta:.4e} s, "
                 f"exponent={point.attenuation_exponent:.4g}")
    return point


def group_index(delta: float, pump: PumpParams, medium: MediumParams,
                quad: Optional[QuadratureConfig] = None,
                integrator: Optional[IDopplerIntegrator] = None) -> float:
    """群折射率 n_g"""
    return dispersion_point(delta, pump, medium, quad, integrator).n_g


def delay_time(delta: float, pump: PumpParams, medium: MediumParams,
               quad: Optional[QuadratureConfig] = None,
               integrator: Optional[IDopplerIntegrator] = None) -> float:
    """延迟时间 θ（秒）"""
    dS = average_dS_domega(delta, pump, medium, quad, integrator)
    return delay_from(dS, probe_omega(delta, pump, medium), medium)


def transmission(delta: float, pump: PumpParams, medium: MediumParams,
                 quad: Optional[QuadratureConfig] = None,
                 integrator: Optional[IDopplerIntegrator] = None):
    """返回 (强度透射率, 衰减指数)"""
    S = average_S(delta, pump, medium, quad, integrator)
    exponent = attenuation_exponent(S, probe_omega(delta, pump, medium), medium)
    return math.exp(-exponent), exponent
