"""
核心模块包
物理参数、磁化率、多普勒平均、色散、脉冲传播、扫描优化，以及配置与日志管理
"""

from .base_interfaces import (
    Command, OutputFormat, SweepVariable, OutputColumn, GammaUnits,
    SimulationError, InvalidParameterError, ConfigurationError, QuadratureConvergenceError,
    InfeasibleConstraintError, NumericRangeError, OutputError, IDopplerIntegrator
)
from .core_types import MediumParams, PumpParams, ProbeParams, PRESETS, load_preset
from .susceptibility import chi_mollow, dchi_ddelta, velocity_shift
from .doppler_average import (
    QuadratureConfig, ComplexSpectrum, AdaptiveQuadIntegrator, FixedNodeIntegrator,
    average_S, average_dS_domega, spectrum_scan
)
from .dispersion import DispersionPoint, dispersion_point, group_index, delay_time, transmission
from .pulse_propagation import (
    GaussianPulseSpec, SamplingConfig, PropagationResult, ModulationReport,
    propagate_pulse, propagate_modulated
)
from .sweep_optimize import SweepSpec, SweepResult, OptimizationResult, run_sweep, optimize_pump
from .config_manager import ConfigManager, RunConfig, parse_config
from .log_manager import LogManager

__all__ = [
    'Command', 'OutputFormat', 'SweepVariable', 'OutputColumn', 'GammaUnits',
    'SimulationError', 'InvalidParameterError', 'ConfigurationError',
    'QuadratureConvergenceError', 'InfeasibleConstraintError', 'NumericRangeError',
    'OutputError', 'IDopplerIntegrator',
    'MediumParams', 'PumpParams', 'ProbeParams', 'PRESETS', 'load_preset',
    'chi_mollow', 'dchi_ddelta', 'velocity_shift',
    'QuadratureConfig', 'ComplexSpectrum', 'AdaptiveQuadIntegrator', 'FixedNodeIntegrator',
    'average_S', 'average_dS_domega', 'spectrum_scan',
    'DispersionPoint', 'dispersion_point', 'group_index', 'delay_time', 'transmission',
    'GaussianPulseSpec', 'SamplingConfig', 'PropagationResult', 'ModulationReport',
    'propagate_pulse', 'propagate_modulated',
    'SweepSpec', 'SweepResult', 'OptimizationResult', 'run_sweep', 'optimize_pump',
    'ConfigManager', 'RunConfig', 'parse_config',
    'LogManager',
]
