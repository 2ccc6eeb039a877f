"""
多普勒平均模块
对麦克斯韦-玻尔兹曼速度分布平均磁化率得到 S(ω)，并解析出宽高斯包络内的窄兰姆凹陷

积分变量为 kv (rad/s)，窗口 [−W·D, +W·D]。
在所有分母实部为零的速度群处强制分段，否则盲积分会漏掉亚均匀线宽的烧孔。
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad as _quadpack

from app.modules.base_interfaces import (
    IDopplerIntegrator, InvalidParameterError, QuadratureConvergenceError
)
from app.modules.core_types import MediumParams, PumpParams
from app.modules.susceptibility import MAX_DETUNING, chi_core, dchi_core
from app.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """多普勒积分配置"""
    integration_halfwidth: float = 6.0     # 以 D 为单位
    rel_tolerance: float = 1e-8
    max_subdivisions: int = 10_000

    def __post_init__(self):
        if not self.integration_halfwidth >= 4:
            raise InvalidParameterError("integration_halfwidth 必须 ≥ 4")
        if not 0 < self.rel_tolerance <= 1e-2:
            raise InvalidParameterError("rel_tolerance 必须在 (0, 1e-2] 内")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 100:
            raise InvalidParameterError("max_subdivisions 必须为 ≥ 100 的整数")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "integration_halfwidth": self.integration_halfwidth,
            "rel_tolerance": self.rel_tolerance,
            "max_subdivisions": int(self.max_subdivisions),
        }


@dataclass
class ComplexSpectrum:
    """探测失谐网格上的多普勒平均磁化率"""
    delta_grid: np.ndarray
    S_values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.delta_grid = np.asarray(self.delta_grid, dtype=float)
        self.S_values = np.asarray(self.S_values, dtype=complex)
        if self.delta_grid.shape != self.S_values.shape:
            raise InvalidParameterError("delta_grid 与 S_values 长度不一致")
        if self.delta_grid.size > 1 and np.any(np.diff(self.delta_grid) <= 0):
            raise InvalidParameterError("delta_grid 必须严格递增")
        if not np.all(np.isfinite(self.S_values)):
            raise InvalidParameterError("S_values 含非有限值")

    def __len__(self) -> int:
        return int(self.delta_grid.size)


# 积分器

class AdaptiveQuadIntegrator(IDopplerIntegrator):
    """QUADPACK 自适应 Gauss-Kronrod 二分积分（主积分器）"""

    name = "adaptive"
    vectorized = False

    def __init__(self, config: Optional[QuadratureConfig] = None):
        self.config = config or QuadratureConfig()
        self.last_error_estimate = 0j     # 最近一次积分的 (实部误差, 虚部误差)

    def integrate(self, integrand: Callable, lower: float, upper: float,
                  breakpoints: Sequence[float], width: float, scale: float) -> complex:
        cfg = self.config
        points = sorted({float(p) for p in _refine_breakpoints(breakpoints, width)
                         if lower < p < upper})
        epsabs = cfg.rel_tolerance * scale
        parts, errors = [], []
        for part in ("real", "imag"):
            fn = (lambda x: integrand(x).real) if part == "real" else (lambda x: integrand(x).imag)
            result = _quadpack(
                fn, lower, upper,
                points=points or None,
                epsabs=epsabs,
                epsrel=cfg.rel_tolerance,
                limit=int(cfg.max_subdivisions),
                full_output=1,
            )
            value, abserr = result[0], result[1]
            target = max(epsabs, cfg.rel_tolerance * abs(value))
            if abserr > target:
                reason = result[3] if len(result) > 3 else "误差估计超出容差"
                raise QuadratureConvergenceError(
                    f"{part} 部分在 {cfg.max_subdivisions} 次细分内未达到容差: {reason}",
                    error_estimate=abserr,
                )
            if len(result) > 3:
                logger.debug(f"{part} 部分因舍入提前停止，误差 {abserr:.3e} 在容差内")
            logger.debug(f"{part} 部分: 子区间 {result[2].get('last', '?')}, 误差 {abserr:.3e}")
            parts.append(value)
            errors.append(abserr)
        self.last_error_estimate = complex(errors[0], errors[1])
        return complex(parts[0], parts[1])


class FixedNodeIntegrator(IDopplerIntegrator):
    """固定节点复合 Gauss-Legendre 积分（独立校验用）

    网格在每个共振位置两侧按几何级数加密，外围用均匀面板覆盖高斯包络。
    """

    name = "fixed"
    vectorized = True

    def __init__(self, order: int = 48, finest_fraction: float = 1.0 / 64,
                 coarse_panels: int = 48):
        self.order = int(order)
        self.finest_fraction = finest_fraction
        self.coarse_panels = int(coarse_panels)
        self._nodes, self._weights = leggauss(self.order)

    def mesh(self, lower: float, upper: float, breakpoints: Sequence[float],
             width: float) -> np.ndarray:
        """面板边界"""
        edges: List[float] = list(np.linspace(lower, upper, self.coarse_panels + 1))
        finest = width * self.finest_fraction
        for center in breakpoints:
            if not lower <= center <= upper:
                continue
            edges.append(center)
            step = finest
            while step < upper - lower:
                edges.extend((center - step, center + step))
                step *= 2.0
        edges_arr = np.unique(np.clip(np.asarray(edges, dtype=float), lower, upper))
        keep = np.concatenate(([True], np.diff(edges_arr) > finest * 1e-6))
        return edges_arr[keep]

    def integrate(self, integrand: Callable, lower: float, upper: float,
                  breakpoints: Sequence[float], width: float, scale: float) -> complex:
        edges = self.mesh(lower, upper, breakpoints, width)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * self._nodes[None, :]).ravel()
        w = (half[:, None] * self._weights[None, :]).ravel()
        values = integrand(x)
        return complex(np.sum(values * w))


# 被积函数与共振位置

def resonance_loci(Delta: float, delta: float) -> List[float]:
    """各分母实部为零的 kv

    Δ_v = 0、Δ_v + δ_v = 0、δ_v − Δ_v = 0、δ_v = 0，以及高斯峰 kv = 0。
    """
    return [-Delta, Delta + delta, (delta - Delta) / 3.0, delta / 2.0, 0.0]


def _refine_breakpoints(centers: Sequence[float], width: float) -> List[float]:
    """在每个共振位置两侧再加 4 与 32 个线宽处的分段点"""
    points = []
    for center in centers:
        points.append(center)
        for offset in (4.0 * width, 32.0 * width):
            points.extend((center - offset, center + offset))
    return points


def _make_integrand(kernel: Callable, Delta: float, delta: float, G: float,
                    medium: MediumParams, D: float, vectorized: bool) -> Callable:
    C, T1, T2 = medium.prefactor_C, medium.T1, medium.T2
    norm = 1.0 / math.sqrt(2.0 * math.pi * D * D)
    inv_two_var = 1.0 / (2.0 * D * D)
    # 对向传播：Δ_v = Δ + kv，δ_v = δ − 2kv
    if vectorized:
        def integrand(kv):
            return kernel(Delta + kv, delta - 2.0 * kv, G, C, T1, T2) * (norm * np.exp(-kv * kv * inv_two_var))
    else:
        exp = math.exp

        def integrand(kv):
            return kernel(Delta + kv, delta - 2.0 * kv, G, C, T1, T2) * (norm * exp(-kv * kv * inv_two_var))
    return integrand


def _line_scale(medium: MediumParams, D: float) -> float:
    """未饱和线心处 |S| 的量级 C·sqrt(π/2)/D"""
    return medium.prefactor_C * math.sqrt(math.pi / 2.0) / D


def _average(kernel: Callable, scale_factor: float, delta: float, pump: PumpParams,
             medium: MediumParams, quad: QuadratureConfig,
             integrator: Optional[IDopplerIntegrator]) -> complex:
    if not (math.isfinite(delta) and abs(delta) <= MAX_DETUNING):
        raise InvalidParameterError(f"探测失谐无效: {delta!r}")
    if medium.prefactor_C == 0:
        return 0j
    integrator = integrator or AdaptiveQuadIntegrator(quad)
    D = medium.doppler_width
    window = quad.integration_halfwidth * D
    width = medium.homogeneous_width
    Delta, G = pump.detuning_Delta, pump.rabi_G
    integrand = _make_integrand(kernel, Delta, delta, G, medium, D, integrator.vectorized)
    try:
        return integrator.integrate(integrand, -window, window, resonance_loci(Delta, delta),
                                    width, _line_scale(medium, D) * scale_factor)
    except QuadratureConvergenceError as e:
        raise e.at_delta(delta) from None


def average_S(delta: float, pump: PumpParams, medium: MediumParams,
              quad: Optional[QuadratureConfig] = None,
              integrator: Optional[IDopplerIntegrator] = None) -> complex:
    """多普勒平均磁化率 S(δ)"""
    return _average(chi_core, 1.0, delta, pump, medium, quad or QuadratureConfig(), integrator)


def average_dS_domega(delta: float, pump: PumpParams, medium: MediumParams,
                      quad: Optional[QuadratureConfig] = None,
                      integrator: Optional[IDopplerIntegrator] = None) -> complex:
    """∂S/∂ω：对解析导数 ∂χ/∂δ_v 做多普勒平均（权重与 ω 无关）"""
    return _average(dchi_core, medium.T2, delta, pump, medium, quad or QuadratureConfig(), integrator)


def spectrum_scan(delta_grid: Sequence[float], pump: PumpParams, medium: MediumParams,
                  quad: Optional[QuadratureConfig] = None,
                  integrator: Optional[IDopplerIntegrator] = None,
                  workers: int = 1) -> ComplexSpectrum:
    """逐点计算 S，结果与并行度无关"""
    quad = quad or QuadratureConfig()
    grid = np.asarray(list(delta_grid), dtype=float)
    if grid.size == 0:
        raise InvalidParameterError("delta_grid 不能为空")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("delta_grid 必须严格递增")

    logger.info(f"开始谱扫描: {grid.size} 点, G={pump.rabi_G:.4g} rad/s, Δ={pump.detuning_Delta:.4g} rad/s")
    func = partial(average_S, pump=pump, medium=medium, quad=quad, integrator=integrator)
    values = parallel_map(func, [float(d) for d in grid], workers=workers)
    metadata = {
        "medium": medium.to_dict(),
        "pump": pump.to_dict(),
        "quadrature": quad.to_dict(),
        "integrator": (integrator.name if integrator else AdaptiveQuadIntegrator.name),
    }
    return ComplexSpectrum(delta_grid=grid, S_values=np.asarray(values, dtype=complex), metadata=metadata)
