"""
Ordered fan-out for independent evaluations (frequency samples, seeded test
pairs). Results always come back in input order, so reports do not depend on
the thread count.
"""
import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(threads):
    """0 or None means one worker per CPU."""
    if not threads:
        return os.cpu_count() or 1
    return max(1, int(threads))


def ordered_map(function, items, threads=1):
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, items))
