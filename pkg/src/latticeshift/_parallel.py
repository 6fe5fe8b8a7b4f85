"""Optional thread pool for independent search branches.

LATTICESHIFT_THREADS sets the worker count (default 1). Results always come
back in input order so output does not depend on scheduling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("LATTICESHIFT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
