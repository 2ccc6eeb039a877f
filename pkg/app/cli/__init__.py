"""
命令行界面
"""

from .main import build_parser, main

__all__ = ["build_parser", "main"]
