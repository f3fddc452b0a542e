"""Order-preserving map over independent sweep points."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_NO_PARALLEL = "QMACRO_NO_PARALLEL"


def serial_forced() -> bool:
    return os.environ.get(ENV_NO_PARALLEL, "") == "1"


def parallel_map(fn, items, max_workers=None):
    """``list(map(fn, items))``, run on threads unless QMACRO_NO_PARALLEL=1.

    Results come back in input order, so reductions over them stay
    bit-identical to the serial run.
    """
    items = list(items)
    if serial_forced() or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=max_workers or min(8, os.cpu_count() or 1)) as pool:
        return list(pool.map(fn, items))
