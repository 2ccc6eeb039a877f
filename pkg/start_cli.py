#!/usr/bin/env python3
"""
命令行启动脚本
用法: python start_cli.py <spectrum|groupindex|gscan|pulse|optimize|show-config|presets> [选项]
"""

import sys
from pathlib import Path

# 检测是否为打包后的可执行文件
if getattr(sys, 'frozen', False):
    project_root = Path(sys.executable).parent
else:
    project_root = Path(__file__).parent

sys.path.insert(0, str(project_root))


def main():
    """主函数"""
    from app.cli.main import main as run_cli
    return run_cli()


if __name__ == "__main__":
    sys.exit(main())
