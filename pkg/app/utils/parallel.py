"""
网格并行求值
逐点计算彼此独立，进程池只改变调度顺序，不改变结果
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import psutil

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "LAMBDIP_WORKERS"


def resolve_workers(workers: Optional[int] = None) -> int:
    """解析工作进程数

    None 时读取环境变量 LAMBDIP_WORKERS；0 表示按物理核数自动选择。
    """
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            logger.warning(f"{WORKERS_ENV}={raw!r} 无效，使用单进程")
            workers = 1
    if workers <= 0:
        workers = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, int(workers))


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """按输入顺序返回 func(item) 列表"""
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(workers, len(items))
    chunksize = max(1, len(items) // (4 * workers))
    logger.debug(f"进程池求值: {len(items)} 点, {workers} 进程, chunksize={chunksize}")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items, chunksize=chunksize))
