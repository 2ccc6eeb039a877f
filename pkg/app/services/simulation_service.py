"""
模拟服务
把解析后的 RunConfig 分派到各计算模块，并交给输出服务写文件
"""

import logging
import time
from dataclasses import replace
from typing import Any, Dict, Optional

from app.modules.base_interfaces import Command, ConfigurationError, SweepVariable
from app.modules.config_manager import RunConfig
from app.modules.dispersion import attenuation_exponent, probe_omega
from app.modules.doppler_average import spectrum_scan
from app.modules.pulse_propagation import propagate_modulated, propagate_pulse
from app.modules.sweep_optimize import SweepSpec, optimize_pump, run_sweep
from app.services.output_writer import emit
from app.utils.parallel import resolve_workers

logger = logging.getLogger(__name__)


class SimulationService:
    """按子命令执行一次模拟"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.integrator = config.make_integrator()
        self.workers = resolve_workers(config.workers)

    def run(self, command: Optional[Command] = None) -> Any:
        """执行计算并返回结果对象"""
        command = command or self.config.command
        if command is None:
            raise ConfigurationError("未指定子命令", key="run.command")
        handlers = {
            Command.SPECTRUM: self.run_spectrum,
            Command.GROUPINDEX: self.run_groupindex,
            Command.GSCAN: self.run_gscan,
            Command.PULSE: self.run_pulse,
            Command.OPTIMIZE: self.run_optimize,
        }
        logger.info(f"开始执行 {command.value}（积分器 {self.integrator.name}, {self.workers} 进程）")
        started = time.time()
        result = handlers[command]()
        logger.info(f"{command.value} 完成，用时 {time.time() - started:.1f} s")
        return result

    def execute(self, command: Optional[Command] = None) -> str:
        """执行并写出结果"""
        result = self.run(command)
        cfg = self.config
        return emit(result, cfg.output_format, cfg.output_path, cfg.snapshot())

    def run_spectrum(self):
        cfg = self.config
        return spectrum_scan(cfg.sweep.grid(), cfg.pump, cfg.medium, cfg.quadrature,
                             self.integrator, workers=self.workers)

    def run_groupindex(self):
        cfg = self.config
        spec = SweepSpec(variable=SweepVariable.PROBE_DETUNING, grid=cfg.sweep.grid(),
                         medium=cfg.medium, pump=cfg.pump, probe=cfg.probe)
        return run_sweep(spec, cfg.quadrature, self.integrator, workers=self.workers)

    def run_gscan(self):
        cfg = self.config
        spec = SweepSpec(variable=SweepVariable.PUMP_RABI, grid=cfg.sweep.grid(),
                         medium=cfg.medium, pump=cfg.pump, probe=cfg.probe)
        return run_sweep(spec, cfg.quadrature, self.integrator, workers=self.workers)

    def run_pulse(self):
        cfg = self.config
        result = propagate_pulse(cfg.pulse, cfg.pump, cfg.medium, cfg.quadrature,
                                 cfg.sampling, self.integrator, workers=self.workers)
        carrier_probe = replace(cfg.probe, detuning_delta=cfg.pulse.carrier_delta)
        report = propagate_modulated(carrier_probe, cfg.pump, cfg.medium, cfg.quadrature, self.integrator)
        result.metadata["carrier"] = self._carrier_summary(result, report, carrier_probe)
        result.metadata["modulation"] = report.to_dict()
        return result

    def run_optimize(self):
        cfg = self.config
        opt = cfg.optimize
        return optimize_pump((opt.G_lo, opt.G_hi), opt.min_transmission, cfg.medium,
                             cfg.quadrature, self.integrator,
                             Delta=cfg.pump.detuning_Delta, delta=cfg.probe.detuning_delta,
                             gamma=cfg.gamma)

    def _carrier_summary(self, result, report, probe) -> Dict[str, float]:
        """载波处的预测值与测量值对照"""
        theta = report.theta
        deviation = (result.measured_delay - theta) / theta if theta else float("nan")
        if theta and abs(deviation) > 0.05:
            logger.warning(f"测得延迟与导数预测相差 {deviation:.1%}")
        return {
            "theta_predicted": theta,
            "attenuation_exponent": attenuation_exponent(
                report.S_carrier, probe_omega(probe.detuning_delta, self.config.pump, self.config.medium),
                self.config.medium),
            "delay_relative_deviation": deviation,
        }
