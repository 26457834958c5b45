"""Thread fan-out with deterministic, input-ordered results."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """Thread cap from ``JSCS_THREADS``, else the CPU count (max 8)."""
    env = os.environ.get("JSCS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"JSCS_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def ordered_map(fn, items, threads=None):
    items = list(items)
    threads = threads or worker_count()
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
