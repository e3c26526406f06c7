import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "QDSM_NUM_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n > 0:
            return n
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """Map ``fn`` over ``items`` on a thread pool; results keep input order.

    Work items are partitioned by the caller, never by the worker count, so the
    output is bit-identical for any number of threads.
    """
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def chunks(n: int, size: int):
    return [(s, min(s + size, n)) for s in range(0, n, size)]
