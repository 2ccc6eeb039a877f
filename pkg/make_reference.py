#!/usr/bin/env python3
"""
参考输出生成脚本
用 rb87-paper 预设运行 spectrum、groupindex、gscan、pulse，把 CSV 写入 docs/reference/
"""

import sys
from pathlib import Path
from typing import List

project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

REFERENCE_DIR = project_root / "docs" / "reference"
REFERENCE_COMMANDS = ("spectrum", "groupindex", "gscan", "pulse")


def reference_runs(out_dir: Path = REFERENCE_DIR, workers: int = 0) -> List[List[str]]:
    """每个子命令对应的命令行参数"""
    return [
        [command, "--set", "run.preset=rb87-paper", "--format", "csv",
         "--workers", str(workers), "--out", str(out_dir / f"{command}.csv")]
        for command in REFERENCE_COMMANDS
    ]


def main() -> int:
    """主函数"""
    from app.cli.main import main as run_cli

    REFERENCE_DIR.mkdir(parents=True, exist_ok=True)
    for argv in reference_runs():
        print(f"▶ {' '.join(argv)}")
        code = run_cli(argv)
        if code != 0:
            print(f"❌ {argv[0]} 失败，退出码 {code}")
            return code
        print(f"✓ 已写出 {argv[-1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
