"""
基础接口定义
定义所有模块共享的异常、枚举和抽象积分器接口
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Callable, Optional, Sequence


class Command(Enum):
    """CLI子命令枚举"""
    SPECTRUM = "spectrum"
    GROUPINDEX = "groupindex"
    GSCAN = "gscan"
    PULSE = "pulse"
    OPTIMIZE = "optimize"


class OutputFormat(Enum):
    """输出格式枚举"""
    CSV = "csv"
    JSON = "json"


class SweepVariable(Enum):
    """扫描变量枚举"""
    PROBE_DETUNING = "probe_detuning"
    PUMP_RABI = "pump_rabi"
    PUMP_DETUNING = "pump_detuning"


class OutputColumn(Enum):
    """扫描输出列"""
    S = "S"
    N_G = "n_g"
    THETA = "theta"
    TRANSMISSION = "transmission"


class GammaUnits(Enum):
    """脉冲谱宽Γ的读法"""
    ORDINARY = "ordinary"   # 120 kHz -> 2π·120e3 rad/s
    ANGULAR = "angular"     # 120 kHz -> 120e3 rad/s


# 异常体系

class SimulationError(Exception):
    """模拟错误基类"""

    category = "simulation-error"
    exit_code = 1


class InvalidParameterError(SimulationError, ValueError):
    """物理参数无效"""

    category = "invalid-parameter"
    exit_code = 2


class ConfigurationError(SimulationError):
    """配置错误（解析失败、采样窗口不足等）"""

    category = "config-error"
    exit_code = 3

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[str] = None):
        self.key = key
        self.line = line
        location = []
        if key:
            location.append(f"key '{key}'")
        if line:
            location.append(str(line))
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class QuadratureConvergenceError(SimulationError):
    """自适应积分在细分上限内未达到容差"""

    category = "convergence"
    exit_code = 4

    def __init__(self, message: str, error_estimate: float, delta: Optional[float] = None):
        self.error_estimate = error_estimate
        self.delta = delta
        if delta is not None:
            message = f"{message} (delta={delta!r} rad/s)"
        super().__init__(f"{message}; error estimate {error_estimate:.3e}")

    def at_delta(self, delta: float) -> "QuadratureConvergenceError":
        """附加出错的探测失谐"""
        message = str(self.args[0]).split("; error estimate")[0]
        return QuadratureConvergenceError(message, self.error_estimate, delta)


class InfeasibleConstraintError(SimulationError):
    """透射率约束在整个区间内都无法满足"""

    category = "infeasible"
    exit_code = 5

    def __init__(self, message: str, max_transmission: float):
        self.max_transmission = max_transmission
        super().__init__(f"{message}; max transmission found {max_transmission:.6g}")


class NumericRangeError(SimulationError):
    """输入量级超出双精度安全范围"""

    category = "numeric-range"
    exit_code = 6


class OutputError(SimulationError):
    """输出文件写入失败"""

    category = "io"
    exit_code = 7


# 积分器接口

class IDopplerIntegrator(ABC):
    """多普勒速度平均的积分器接口

    被积函数以 kv (rad/s) 为自变量，返回复数。
    vectorized 为 True 的积分器会以 numpy 数组调用被积函数。
    """

    name: str = "abstract"
    vectorized: bool = False

    @abstractmethod
    def integrate(self, integrand: Callable, lower: float, upper: float,
                  breakpoints: Sequence[float], width: float, scale: float) -> complex:
        """在 [lower, upper] 上积分

        breakpoints: 被积函数存在窄结构的位置，积分器需在这些点强制分段
        width: 窄结构的典型宽度（均匀线宽）
        scale: 结果的典型量级，用作绝对容差下限
        """
        pass
