"""Thread pool helpers with order-preserving, deterministic results."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    env = os.environ.get("COALITION_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, evaluated on a thread pool.

    Each result lands in its input's slot, so the output does not depend on
    scheduling or on the worker count.
    """
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=1))
