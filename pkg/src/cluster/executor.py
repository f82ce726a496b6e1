import os
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence


class DeviceExecutor:
    """Исполнение шагов по осколкам устройств в пуле потоков; результаты в фиксированном порядке."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers

    def _get_worker_count(self, task_count: int) -> int:
        """Определить количество воркеров."""
        max_procs = os.cpu_count() or 1
        if self.workers is None:
            return max(1, min(task_count, max_procs))
        return max(1, min(self.workers, max_procs, task_count))

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
        """Применить `fn` к каждому элементу; порядок результатов совпадает с порядком `items`."""
        if not items:
            return []
        workers = self._get_worker_count(len(items))
        if workers == 1:
            return [fn(item) for item in items]

        by_index: Dict[int, Any] = {}
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(fn, item): i for i, item in enumerate(items)}
            for future in as_completed(futures):
                i = futures[future]
                try:
                    by_index[i] = future.result()
                except Exception as exc:
                    logging.error("Device task %d failed: %s", i, exc)
                    raise
        return [by_index[i] for i in range(len(items))]
