"""
网格点并发执行器
用信号量限制同时计算的网格点数，结果按网格顺序返回
"""

import asyncio
from contextlib import asynccontextmanager
from typing import Callable, Dict, List, Sequence, TypeVar

from loguru import logger

T = TypeVar("T")
R = TypeVar("R")


class GridExecutor:
    """网格点执行队列"""

    def __init__(self, max_concurrent: int = 1):
        if max_concurrent < 1:
            raise ValueError(f"jobs must be at least 1, got {max_concurrent}")
        self.max_concurrent = max_concurrent
        self.semaphore = asyncio.Semaphore(max_concurrent)
        self.active_points = 0
        self.completed_points = 0
        self._lock = asyncio.Lock()

    @asynccontextmanager
    async def acquire_slot(self):
        """获取并发槽位"""
        async with self.semaphore:
            async with self._lock:
                self.active_points += 1

            try:
                yield
            finally:
                async with self._lock:
                    self.active_points -= 1
                    self.completed_points += 1

    def get_queue_status(self) -> Dict[str, int]:
        """获取队列状态"""
        return {
            "active_points": self.active_points,
            "completed_points": self.completed_points,
            "max_concurrent": self.max_concurrent,
            "available_slots": self.max_concurrent - self.active_points,
        }

    async def _run_one(self, func: Callable[[T], R], item: T) -> R:
        async with self.acquire_slot():
            return await asyncio.to_thread(func, item)

    async def map_async(self, func: Callable[[T], R], items: Sequence[T]) -> List[R]:
        # gather 保持输入顺序
        return list(await asyncio.gather(*(self._run_one(func, item) for item in items)))


def run_grid(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
    """按网格顺序计算 func(item)；jobs = 1 时顺序执行"""
    if jobs <= 1:
        return [func(item) for item in items]

    async def _main() -> List[R]:
        # 信号量需在事件循环内创建
        executor = GridExecutor(max_concurrent=jobs)
        results = await executor.map_async(func, items)
        logger.debug(f"Grid finished: {executor.get_queue_status()}")
        return results

    return asyncio.run(_main())


__all__ = ["GridExecutor", "run_grid"]
