"""
命令行入口
子命令：spectrum / groupindex / gscan / pulse / optimize 计算并写出结果，
show-config 打印解析后的参数快照，presets 列出内置预设

失败时向标准错误输出 `error: <category>: <message>`，退出码由异常类别决定。
"""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from app.modules.base_interfaces import Command, GammaUnits, OutputFormat, SimulationError
from app.modules.config_manager import ConfigManager, LogConfig, describe_schema
from app.modules.core_types import PRESETS
from app.modules.log_manager import LogManager
from app.services.simulation_service import SimulationService

logger = logging.getLogger(__name__)

SHOW_CONFIG = "show-config"
LIST_PRESETS = "presets"

_COMMAND_HELP = {
    Command.SPECTRUM: "探测失谐扫描的吸收与色散谱 S(δ)",
    Command.GROUPINDEX: "群折射率、延迟与透射随 δ 的变化",
    Command.GSCAN: "δ 固定时群折射率随泵浦拉比频率 G 的变化",
    Command.PULSE: "高斯脉冲穿过介质与真空的时域波形",
    Command.OPTIMIZE: "透射率约束下使群折射率最大的泵浦 G",
}

# 命令行参数 -> 配置项
_FLAG_KEYS = {
    "out": "run.output_path",
    "format": "run.output_format",
    "gamma_units": "run.gamma_units",
    "workers": "run.workers",
    "integrator": "run.integrator",
    "log_level": "log.level",
}


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="PATH", help="配置文件（section.key = value [unit]）")
    parent.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="覆盖单个配置项，可重复")
    parent.add_argument("--out", metavar="PATH", help="输出文件，缺省写到标准输出")
    parent.add_argument("--format", choices=[f.value for f in OutputFormat], help="输出格式")
    parent.add_argument("--gamma-units", dest="gamma_units", choices=[g.value for g in GammaUnits],
                        help="pulse.Gamma 中 Hz 族单位按普通频率 (ordinary) 或 rad/s (angular) 读")
    parent.add_argument("--workers", type=int, help="工作进程数，0 为按物理核数")
    parent.add_argument("--integrator", choices=["adaptive", "fixed"], help="多普勒积分器")
    parent.add_argument("--log-level", dest="log_level",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")
    return parent


def build_parser() -> argparse.ArgumentParser:
    schema_lines = "\n".join(f"  {key:34s} {doc}" for key, doc in describe_schema())
    parser = argparse.ArgumentParser(
        prog="lambdip",
        description="饱和吸收兰姆凹陷慢光模拟器",
        epilog=f"配置项:\n{schema_lines}",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    common = _common_options()
    for command, help_text in _COMMAND_HELP.items():
        subparsers.add_parser(command.value, parents=[common], help=help_text)
    subparsers.add_parser(SHOW_CONFIG, parents=[common], help="打印解析后的参数快照 (JSON)")
    subparsers.add_parser(LIST_PRESETS, help="列出内置预设")
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, str]:
    flags = {}
    for name, key in _FLAG_KEYS.items():
        value = getattr(args, name, None)
        if value is not None:
            flags[key] = str(value)
    return flags


def _list_presets() -> int:
    for name, factory in sorted(PRESETS.items()):
        medium, pump, _ = factory()
        doc = (factory.__doc__ or "").strip().splitlines()[0]
        print(f"{name}: {doc}")
        print(f"  γ = {medium.homogeneous_width:.6g} rad/s, D = {medium.doppler_width:.6g} rad/s, "
              f"N = {medium.density_N:.6g} cm^-3, l = {medium.length_l:.6g} cm, "
              f"G = {pump.rabi_G:.6g} rad/s")
    return 0


def _run(args: argparse.Namespace, log_manager: LogManager) -> int:
    if args.command == LIST_PRESETS:
        return _list_presets()

    command = None if args.command == SHOW_CONFIG else Command(args.command)
    manager = ConfigManager(config_file=args.config)
    config = manager.load(command=command, overrides=args.overrides, flags=_flags(args))

    if config.log != log_manager.config:
        log_manager.stop()
        log_manager.config = config.log
        log_manager.start()

    if command is None:
        print(json.dumps(manager.get_snapshot(), indent=1, sort_keys=True, ensure_ascii=False))
        return 0

    SimulationService(config).execute(command)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """命令行主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)

    log_config = LogConfig.from_env()
    if getattr(args, "log_level", None):
        log_config.level = args.log_level
    log_manager = LogManager(log_config)
    log_manager.start()

    try:
        return _run(args, log_manager)
    except SimulationError as e:
        logger.error(f"{args.command} 失败: {e}")
        print(f"error: {e.category}: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return 130
    finally:
        if args.command != LIST_PRESETS:
            print(f"lambdip: {log_manager.summary()}", file=sys.stderr)
        log_manager.stop()


if __name__ == "__main__":
    sys.exit(main())
