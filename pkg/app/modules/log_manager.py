"""
日志管理模块
统一日志处理：控制台输出、按大小轮转的日志文件，以及退出摘要用的级别计数
"""

import logging
import tempfile
import threading
from collections import Counter
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Dict, Optional

from .config_manager import LogConfig

logger = logging.getLogger(__name__)


class LevelCountHandler(logging.Handler):
    """按级别计数，不保留记录本身"""

    def __init__(self):
        super().__init__(level=logging.DEBUG)
        self.counts: Counter = Counter()
        self.lock = threading.RLock()

    def emit(self, record):
        with self.lock:
            self.counts[record.levelname] += 1

    def snapshot(self) -> Dict[str, int]:
        with self.lock:
            return dict(self.counts)


class LogManager:
    """日志管理器

    start() 把处理器挂到根日志记录器，stop() 负责摘除并关闭。
    """

    def __init__(self, config: Optional[LogConfig] = None):
        self.config = config or LogConfig()
        self.log_dir = Path(self.config.log_dir)
        self.count_handler = LevelCountHandler()
        self.console_handler: Optional[logging.Handler] = None
        self.file_handler: Optional[RotatingFileHandler] = None
        self._started = False

    @property
    def level(self) -> int:
        return getattr(logging, self.config.level.upper(), logging.INFO)

    def start(self) -> bool:
        """安装处理器"""
        if self._started:
            return True
        formatter = logging.Formatter(self.config.log_format)
        root_logger = logging.getLogger()
        root_logger.setLevel(self.level)

        root_logger.addHandler(self.count_handler)

        if self.config.console_output:
            self.console_handler = logging.StreamHandler()
            self.console_handler.setFormatter(formatter)
            self.console_handler.setLevel(self.level)
            root_logger.addHandler(self.console_handler)

        if self.config.file_output:
            self._create_file_handler(formatter)

        self._started = True
        logger.debug(f"日志管理器已启动，级别 {self.config.level}")
        return True

    def stop(self) -> bool:
        """摘除并关闭处理器"""
        root_logger = logging.getLogger()
        for handler in (self.count_handler, self.console_handler, self.file_handler):
            if handler is not None and handler in root_logger.handlers:
                root_logger.removeHandler(handler)
        for handler in (self.console_handler, self.file_handler):
            if handler is not None:
                handler.close()
        self.console_handler = None
        self.file_handler = None
        self._started = False
        return True

    @property
    def log_file(self) -> Optional[str]:
        return self.file_handler.baseFilename if self.file_handler else None

    def summary(self) -> str:
        """运行结束时的一行摘要"""
        counts = self.count_handler.snapshot()
        errors = counts.get("ERROR", 0) + counts.get("CRITICAL", 0)
        return f"warnings: {counts.get('WARNING', 0)}, errors: {errors}"

    def _create_file_handler(self, formatter: logging.Formatter) -> bool:
        """创建按大小轮转的文件处理器，目录不可写时退到临时目录"""
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.log_dir = Path(tempfile.gettempdir()) / "lambdip_logs"
            self.log_dir.mkdir(parents=True, exist_ok=True)
            logger.warning(f"无法创建日志目录，使用临时目录: {self.log_dir}, 错误: {e}")

        file_path = self.log_dir / f"lambdip_{datetime.now().strftime('%Y%m%d')}.log"
        try:
            handler = RotatingFileHandler(
                str(file_path),
                maxBytes=self.config.max_file_size,
                backupCount=self.config.max_files,
                encoding='utf-8',
            )
        except OSError as e:
            logger.error(f"创建文件处理器失败: {e}")
            return False
        handler.setFormatter(formatter)
        handler.setLevel(self.level)
        logging.getLogger().addHandler(handler)
        self.file_handler = handler
        logger.info(f"文件处理器已创建: {file_path}")
        return True
