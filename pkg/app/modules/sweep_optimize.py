"""
参数扫描与泵浦强度优化
复现探测失谐、泵浦拉比频率、泵浦失谐的扫描数据，并在透射率约束下搜索群折射率最大的 G
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from app.modules.base_interfaces import (
    IDopplerIntegrator, InfeasibleConstraintError, InvalidParameterError, OutputColumn,
    SimulationError, SweepVariable
)
from app.modules.core_types import MediumParams, ProbeParams, PumpParams
from app.modules.dispersion import (
    DispersionPoint, assemble_point, attenuation_exponent, dispersion_point, probe_omega
)
from app.modules.doppler_average import QuadratureConfig, average_S
from app.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (math.sqrt(5.0) - 1.0) / 2.0

# 扫描变量对应的参数字段
_VARIABLE_FIELDS = {
    SweepVariable.PROBE_DETUNING: "detuning_delta",
    SweepVariable.PUMP_RABI: "rabi_G",
    SweepVariable.PUMP_DETUNING: "detuning_Delta",
}
_PUMP_FIELDS = ("rabi_G", "detuning_Delta")
_PROBE_FIELDS = ("detuning_delta",)


@dataclass(frozen=True)
class SweepSpec:
    """扫描描述"""
    variable: SweepVariable
    grid: Tuple[float, ...]
    medium: MediumParams
    pump: PumpParams = field(default_factory=PumpParams)
    probe: ProbeParams = field(default_factory=ProbeParams)
    outputs: Tuple[OutputColumn, ...] = tuple(OutputColumn)
    fixed_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variable", SweepVariable(self.variable))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "outputs", tuple(OutputColumn(o) for o in self.outputs))
        if not self.grid:
            raise InvalidParameterError("扫描网格不能为空")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise InvalidParameterError("扫描网格必须严格递增")
        unknown = set(self.fixed_overrides) - set(_PUMP_FIELDS + _PROBE_FIELDS)
        if unknown:
            raise InvalidParameterError(f"未知的固定参数覆盖: {sorted(unknown)}")
        if _VARIABLE_FIELDS[self.variable] in self.fixed_overrides:
            raise InvalidParameterError(f"扫描变量 {self.variable.value} 不能同时出现在固定覆盖中")

    def resolved_fixed(self) -> Tuple[PumpParams, ProbeParams]:
        pump_kw = {k: v for k, v in self.fixed_overrides.items() if k in _PUMP_FIELDS}
        probe_kw = {k: v for k, v in self.fixed_overrides.items() if k in _PROBE_FIELDS}
        return replace(self.pump, **pump_kw), replace(self.probe, **probe_kw)

    def needs_derivative(self) -> bool:
        return bool({OutputColumn.N_G, OutputColumn.THETA} & set(self.outputs))


@dataclass(frozen=True)
class SweepRow:
    """扫描结果的一行"""
    value: float
    delta: float
    rabi_G: float
    detuning_Delta: float
    point: Optional[DispersionPoint] = None
    error: str = ""


@dataclass
class SweepResult:
    """按网格顺序排列的扫描结果"""
    spec: SweepSpec
    rows: List[SweepRow]

    def __len__(self) -> int:
        return len(self.rows)

    def failed(self) -> List[SweepRow]:
        return [row for row in self.rows if row.error]


@dataclass(frozen=True)
class OptimizationResult:
    """约束优化结果"""
    rabi_G: float
    n_g: float
    transmission: float
    attenuation_exponent: float
    theta: float
    constraint_active: bool
    evaluations: int


def _evaluate_row(value: float, spec: SweepSpec, quad: QuadratureConfig,
                  integrator: Optional[IDopplerIntegrator]) -> SweepRow:
    pump, probe = spec.resolved_fixed()
    delta = probe.detuning_delta
    if spec.variable is SweepVariable.PROBE_DETUNING:
        delta = value
    elif spec.variable is SweepVariable.PUMP_RABI:
        pump = replace(pump, rabi_G=value)
    else:
        pump = replace(pump, detuning_Delta=value)
    try:
        if spec.needs_derivative():
            point = dispersion_point(delta, pump, spec.medium, quad, integrator)
        else:
            S = average_S(delta, pump, spec.medium, quad, integrator)
            point = assemble_point(delta, S, complex("nan+nanj"), pump, spec.medium)
        error = ""
    except SimulationError as e:
        logger.warning(f"扫描点 {spec.variable.value}={value:.6g} 失败: {e}")
        point, error = None, f"{e.category}: {e}"
    return SweepRow(value=value, delta=delta, rabi_G=pump.rabi_G,
                    detuning_Delta=pump.detuning_Delta, point=point, error=error)


def run_sweep(spec: SweepSpec, quad: Optional[QuadratureConfig] = None,
              integrator: Optional[IDopplerIntegrator] = None,
              workers: int = 1) -> SweepResult:
    """逐网格点计算所需的派生量，单点失败记录在行内"""
    quad = quad or QuadratureConfig()
    logger.info(f"开始扫描 {spec.variable.value}: {len(spec.grid)} 点")
    func = partial(_evaluate_row, spec=spec, quad=quad, integrator=integrator)
    rows = parallel_map(func, list(spec.grid), workers=workers)
    result = SweepResult(spec=spec, rows=rows)
    failures = len(result.failed())
    if failures:
        logger.warning(f"扫描完成，{failures}/{len(rows)} 点失败")
    else:
        logger.info("扫描完成")
    return result


# 约束优化

class _PumpObjective:
    """带缓存的 G → 色散量求值"""

    def __init__(self, medium: MediumParams, Delta: float, delta: float,
                 quad: QuadratureConfig, integrator: Optional[IDopplerIntegrator]):
        self.medium = medium
        self.Delta = Delta
        self.delta = delta
        self.quad = quad
        self.integrator = integrator
        self._points: Dict[float, DispersionPoint] = {}
        self._transmissions: Dict[float, float] = {}

    @property
    def evaluations(self) -> int:
        return len(self._transmissions)

    def _pump(self, G: float) -> PumpParams:
        return PumpParams(rabi_G=G, detuning_Delta=self.Delta)

    def point(self, G: float) -> DispersionPoint:
        if G not in self._points:
            self._points[G] = dispersion_point(self.delta, self._pump(G), self.medium,
                                               self.quad, self.integrator)
            self._transmissions[G] = self._points[G].transmission
        return self._points[G]

    def transmission(self, G: float) -> float:
        if G not in self._transmissions:
            pump = self._pump(G)
            S = average_S(self.delta, pump, self.medium, self.quad, self.integrator)
            exponent = attenuation_exponent(S, probe_omega(self.delta, pump, self.medium), self.medium)
            self._transmissions[G] = math.exp(-exponent)
        return self._transmissions[G]

    def n_g(self, G: float) -> float:
        return self.point(G).n_g


def golden_section_max(func, lo: float, hi: float, xtol: float) -> Tuple[float, float]:
    """单峰函数在 [lo, hi] 上的最大值，区间缩至 xtol 后在所有已求值点中取最优"""
    a, b = lo, hi
    x1 = b - GOLDEN_RATIO * (b - a)
    x2 = a + GOLDEN_RATIO * (b - a)
    f1, f2 = func(x1), func(x2)
    while b - a > xtol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN_RATIO * (b - a)
            f1 = func(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN_RATIO * (b - a)
            f2 = func(x2)
    candidates = [(func(lo), lo), (func(hi), hi), (f1, x1), (f2, x2)]
    best_f, best_x = max(candidates, key=lambda c: c[0])
    return best_x, best_f


def _feasible_boundary(objective: _PumpObjective, infeasible: float, feasible: float,
                       constraint: float, xtol: float) -> float:
    """T(G) = constraint 在不可行点与可行点之间的根，结果取在可行一侧"""
    if objective.transmission(feasible) == constraint:
        return feasible
    root = brentq(lambda G: objective.transmission(G) - constraint,
                  min(infeasible, feasible), max(infeasible, feasible), xtol=xtol)
    step = math.copysign(xtol, feasible - infeasible)
    for G in (root, root + step):
        if min(infeasible, feasible) <= G <= max(infeasible, feasible) \
                and objective.transmission(G) >= constraint:
            return G
    return feasible


def optimize_pump(bounds: Tuple[float, float], constraint: float, medium: MediumParams,
                  quad: Optional[QuadratureConfig] = None,
                  integrator: Optional[IDopplerIntegrator] = None,
                  Delta: float = 0.0, delta: float = 0.0,
                  gamma: Optional[float] = None, scan_points: int = 21) -> OptimizationResult:
    """在 transmission(δ) ≥ constraint 下最大化 n_g(δ)

    黄金分割假设 n_g(G) 在区间内单峰；约束起作用时返回可行边界并置标志。
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (0 <= lo <= hi):
        raise InvalidParameterError(f"G 区间无效: [{lo}, {hi}]")
    if not (0 <= constraint <= 1):
        raise InvalidParameterError(f"透射率约束必须在 [0, 1] 内，实际为 {constraint}")
    quad = quad or QuadratureConfig()
    gamma = gamma if gamma is not None else medium.homogeneous_width
    xtol = 1e-3 * gamma
    objective = _PumpObjective(medium, Delta, delta, quad, integrator)

    def finish(G: float, active: bool) -> OptimizationResult:
        point = objective.point(G)
        logger.info(f"优化结果: G={G:.6g} rad/s, n_g={point.n_g:.6g}, "
                    f"透射 {point.transmission:.4g}, 约束起作用={active}")
        return OptimizationResult(
            rabi_G=G, n_g=point.n_g, transmission=point.transmission,
            attenuation_exponent=point.attenuation_exponent, theta=point.theta,
            constraint_active=active, evaluations=objective.evaluations,
        )

    if hi == lo:
        if objective.transmission(lo) < constraint:
            raise InfeasibleConstraintError("退化区间上约束不可满足", objective.transmission(lo))
        return finish(lo, False)

    G_star, _ = golden_section_max(objective.n_g, lo, hi, xtol)
    if objective.transmission(G_star) >= constraint:
        return finish(G_star, False)

    # 约束起作用：寻找可行点
    candidates = [lo, hi] + list(np.linspace(lo, hi, scan_points))
    feasible = [G for G in candidates if objective.transmission(G) >= constraint]
    if not feasible:
        best = max(objective.transmission(G) for G in candidates)
        raise InfeasibleConstraintError(
            f"G ∈ [{lo:.6g}, {hi:.6g}] 内透射率均低于约束 {constraint}", best
        )
    nearest = min(feasible, key=lambda G: abs(G - G_star))
    boundary = _feasible_boundary(objective, G_star, nearest, constraint, xtol)
    return finish(boundary, True)
