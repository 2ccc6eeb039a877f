"""
脉冲传播模块
高斯脉冲经频域传递函数 exp[i(ω/c)(1 + 2πS(ω))l] 穿过介质，与真空参考比较延迟和透射；
另含小调制探测光的线性化有效性检查

时间与频率均相对载波：x = ω − ω0，包络 A(t) = (1/2π)∫Ê(x)H(x)e^{−ixt}dx。
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Dict, Optional

import numpy as np
from scipy.special import erfc

from app.modules.base_interfaces import (
    ConfigurationError, IDopplerIntegrator, InvalidParameterError
)
from app.modules.core_types import MediumParams, ProbeParams, PumpParams
from app.modules.dispersion import (
    attenuation_exponent, delay_from, probe_omega
)
from app.modules.doppler_average import QuadratureConfig, average_dS_domega, average_S
from app.utils.parallel import parallel_map
from app.utils.units import C_LIGHT, TWO_PI

logger = logging.getLogger(__name__)

# 线性化判据：|S(ω±ν) − (S ± ν∂S/∂ω)| < 1e-3·|S|
LINEARIZATION_TOLERANCE = 1e-3
MAX_SPECTRAL_LEAKAGE = 1e-8
PARSEVAL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GaussianPulseSpec:
    """高斯脉冲包络：Ê(x) = E0/sqrt(πΓ²)·exp(−x²/Γ²)，时域宽度 τ"""
    Gamma: float                 # rad/s
    tau: float                   # s
    carrier_delta: float = 0.0   # 载波的 δ，rad/s
    amplitude: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.Gamma) and self.Gamma > 0):
            raise InvalidParameterError(f"Gamma 必须为正，实际为 {self.Gamma!r}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise InvalidParameterError(f"tau 必须为正，实际为 {self.tau!r}")

    @classmethod
    def from_gamma(cls, Gamma: float, carrier_delta: float = 0.0,
                   amplitude: float = 1.0) -> "GaussianPulseSpec":
        """按 Γτ = 2 构造"""
        return cls(Gamma=Gamma, tau=2.0 / Gamma, carrier_delta=carrier_delta, amplitude=amplitude)

    def spectrum(self, x: np.ndarray) -> np.ndarray:
        return self.amplitude / math.sqrt(math.pi * self.Gamma ** 2) * np.exp(-(x / self.Gamma) ** 2)

    def to_dict(self) -> Dict[str, Any]:
        return {"Gamma": self.Gamma, "tau": self.tau,
                "carrier_delta": self.carrier_delta, "amplitude": self.amplitude}


@dataclass(frozen=True)
class SamplingConfig:
    """FFT 采样配置"""
    samples: int = 2 ** 14
    window_halfwidth: Optional[float] = None   # rad/s，None 时自动选择
    spectral_floor: float = 1e-16               # 低于此相对振幅的频点不求传递函数

    def __post_init__(self):
        n = int(self.samples)
        if n != self.samples or n < 4096 or n & (n - 1):
            raise InvalidParameterError(f"samples 必须为 ≥ 4096 的 2 的幂，实际为 {self.samples!r}")
        if self.window_halfwidth is not None and not self.window_halfwidth > 0:
            raise InvalidParameterError("window_halfwidth 必须为正")
        if not 0 <= self.spectral_floor < 1e-8:
            raise InvalidParameterError("spectral_floor 必须在 [0, 1e-8) 内")

    def to_dict(self) -> Dict[str, Any]:
        return {"samples": int(self.samples), "window_halfwidth": self.window_halfwidth,
                "spectral_floor": self.spectral_floor}


@dataclass
class PropagationResult:
    """真空参考与介质输出的时域波形及测得的延迟、透射"""
    time_grid: np.ndarray
    intensity_vacuum: np.ndarray
    intensity_medium: np.ndarray
    measured_delay: float
    measured_transmission: float
    peak_delay: float
    energy_transmission: float
    delay_method: str = "centroid"
    transmission_method: str = "peak"
    parseval_error: float = 0.0
    spectral_width_ratio: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ModulationReport:
    """调制探测光的延迟与边带报告"""
    theta: float                 # 线性化延迟（导数法），s
    theta_sideband: float        # 由精确边带相位得到的调制延迟，s
    S_carrier: complex
    dS_domega: complex
    S_plus: complex              # S(ω+ν)
    S_minus: complex             # S(ω−ν)
    exponent_plus: float
    exponent_minus: float
    linearization_residual: float  # max|S(ω±ν) − (S ± ν∂S/∂ω)| / |S|
    is_linear_valid: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in ("S_carrier", "dS_domega", "S_plus", "S_minus"):
            value = getattr(self, name)
            data[name] = [value.real, value.imag]
        return data


def window_halfwidth(pulse: GaussianPulseSpec, medium: MediumParams,
                     sampling: SamplingConfig) -> float:
    """频率半窗宽：覆盖脉冲谱与凹陷结构，并保证时间步长 ≤ τ/200"""
    if sampling.window_halfwidth is not None:
        return float(sampling.window_halfwidth)
    return max(8.0 * pulse.Gamma, 40.0 * medium.homogeneous_width, 200.0 * math.pi / pulse.tau)


def _peak_time(t: np.ndarray, intensity: np.ndarray) -> float:
    """峰值位置，三点抛物线插值"""
    i = int(np.argmax(intensity))
    if 0 < i < len(intensity) - 1:
        y0, y1, y2 = intensity[i - 1], intensity[i], intensity[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0:
            return float(t[i] + 0.5 * (y0 - y2) / denom * (t[1] - t[0]))
    return float(t[i])


def _centroid(t: np.ndarray, intensity: np.ndarray) -> float:
    return float(np.sum(t * intensity) / np.sum(intensity))


def _envelope(spectrum: np.ndarray, x: np.ndarray, t0: float, dx: float) -> np.ndarray:
    """A(t_n) = dx/(2π)·Σ_k F_k e^{−i x_k (t0 + n·dt)}"""
    return np.fft.fft(spectrum * np.exp(-1j * x * t0)) * (dx / TWO_PI)


def propagate_pulse(pulse: GaussianPulseSpec, pump: PumpParams, medium: MediumParams,
                    quad: Optional[QuadratureConfig] = None,
                    sampling: Optional[SamplingConfig] = None,
                    integrator: Optional[IDopplerIntegrator] = None,
                    workers: int = 1) -> PropagationResult:
    """高斯脉冲穿过长度 l 的介质与真空"""
    quad = quad or QuadratureConfig()
    sampling = sampling or SamplingConfig()
    n = int(sampling.samples)
    half_width = window_halfwidth(pulse, medium, sampling)

    leakage = float(erfc(math.sqrt(2.0) * half_width / pulse.Gamma))
    if leakage > MAX_SPECTRAL_LEAKAGE:
        raise ConfigurationError(
            f"频率窗口过窄：谱能量泄漏 {leakage:.2e} > {MAX_SPECTRAL_LEAKAGE:.0e}",
            key="pulse.window_halfwidth",
        )

    dx = 2.0 * half_width / n
    dt = TWO_PI / (n * dx)
    x = TWO_PI * np.fft.fftfreq(n, d=dt)
    t0 = -0.5 * n * dt
    t = t0 + dt * np.arange(n)

    ratio = pulse.Gamma / medium.homogeneous_width
    if ratio > 0.5:
        logger.warning(f"脉冲谱宽 Γ 为均匀线宽的 {ratio:.2f} 倍，谱未完全落在兰姆凹陷内，脉冲将畸变")

    spectrum = pulse.spectrum(x)
    vacuum_transfer = np.exp(1j * x * medium.length_l / C_LIGHT)

    # 只在脉冲谱不可忽略的频点求 S，其余频点的乘积低于双精度
    S = np.zeros(n, dtype=complex)
    if medium.prefactor_C != 0:
        active = np.abs(spectrum) > sampling.spectral_floor * np.max(np.abs(spectrum))
        deltas = pulse.carrier_delta + x[active]
        logger.info(f"脉冲传播: {n} 采样点, 需计算 S 的频点 {int(active.sum())} 个")
        func = partial(average_S, pump=pump, medium=medium, quad=quad, integrator=integrator)
        S[active] = parallel_map(func, [float(d) for d in deltas], workers=workers)

    omega = probe_omega(pulse.carrier_delta, pump, medium) + x
    medium_transfer = vacuum_transfer * np.exp(1j * (omega / C_LIGHT) * TWO_PI * medium.length_l * S)

    field_vacuum = _envelope(spectrum * vacuum_transfer, x, t0, dx)
    field_medium = _envelope(spectrum * medium_transfer, x, t0, dx)
    intensity_vacuum = np.abs(field_vacuum) ** 2
    intensity_medium = np.abs(field_medium) ** 2

    # 解析能量 ∫|A|²dt = (E0/2π)²·sqrt(2π)/Γ，检验时间窗是否截断脉冲
    analytic_energy = (pulse.amplitude / TWO_PI) ** 2 * math.sqrt(TWO_PI) / pulse.Gamma
    temporal_energy = float(np.sum(intensity_vacuum) * dt)
    parseval_error = abs(temporal_energy - analytic_energy) / analytic_energy
    if parseval_error > PARSEVAL_TOLERANCE:
        raise ConfigurationError(
            f"时域与频域能量不一致（相对误差 {parseval_error:.2e}），请增大采样点数或调整窗口",
            key="pulse.samples",
        )

    measured_delay = _centroid(t, intensity_medium) - _centroid(t, intensity_vacuum)
    peak_delay = _peak_time(t, intensity_medium) - _peak_time(t, intensity_vacuum)
    measured_transmission = float(np.max(intensity_medium) / np.max(intensity_vacuum))
    energy_transmission = float(np.sum(intensity_medium) / np.sum(intensity_vacuum))
    logger.info(f"测得延迟 {measured_delay:.4e} s（峰值法 {peak_delay:.4e} s），"
                f"峰值透射 {measured_transmission:.4g}")

    return PropagationResult(
        time_grid=t,
        intensity_vacuum=intensity_vacuum,
        intensity_medium=intensity_medium,
        measured_delay=measured_delay,
        measured_transmission=measured_transmission,
        peak_delay=peak_delay,
        energy_transmission=energy_transmission,
        parseval_error=parseval_error,
        spectral_width_ratio=ratio,
        metadata={
            "pulse": pulse.to_dict(),
            "sampling": sampling.to_dict(),
            "window_halfwidth": half_width,
            "time_step": dt,
        },
    )


def propagate_modulated(probe: ProbeParams, pump: PumpParams, medium: MediumParams,
                        quad: Optional[QuadratureConfig] = None,
                        integrator: Optional[IDopplerIntegrator] = None) -> ModulationReport:
    """调制探测光：线性化延迟、精确边带与有效性标志"""
    delta, nu = probe.detuning_delta, probe.modulation_freq_nu
    S = average_S(delta, pump, medium, quad, integrator)
    dS = average_dS_domega(delta, pump, medium, quad, integrator)
    omega = probe_omega(delta, pump, medium)
    theta = delay_from(dS, omega, medium)

    if nu == 0:
        S_plus = S_minus = S
        theta_sideband = theta
    else:
        S_plus = average_S(delta + nu, pump, medium, quad, integrator)
        S_minus = average_S(delta - nu, pump, medium, quad, integrator)
        theta_sideband = (TWO_PI * medium.length_l * (omega / C_LIGHT)
                          * (S_plus.real - S_minus.real) / (2.0 * nu))

    residual = max(abs(S_plus - (S + nu * dS)), abs(S_minus - (S - nu * dS)))
    relative = residual / abs(S) if S != 0 else 0.0
    valid = relative < LINEARIZATION_TOLERANCE
    if not valid:
        logger.warning(f"小调制线性化失效: 残差 {relative:.3e} ≥ {LINEARIZATION_TOLERANCE:.0e}，"
                       f"请使用精确边带结果")

    return ModulationReport(
        theta=theta,
        theta_sideband=theta_sideband,
        S_carrier=S,
        dS_domega=dS,
        S_plus=S_plus,
        S_minus=S_minus,
        exponent_plus=attenuation_exponent(S_plus, omega + nu, medium),
        exponent_minus=attenuation_exponent(S_minus, omega - nu, medium),
        linearization_residual=relative,
        is_linear_valid=valid,
    )
