"""
Ordered fan-out of independent trials to worker processes.

Each worker returns a status dictionary instead of raising, so one failing
trial never takes down the whole suite.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


def run_task(fn: Callable, payload: Any) -> Dict[str, Any]:
    """
    Run one task and wrap the outcome.

    Returns:
        {"status": "success", "result": ...} or {"status": "error", "message": ...}
    """
    try:
        return {"status": "success", "result": fn(payload)}
    except Exception as e:
        return {"status": "error", "message": f"{type(e).__name__}: {e}"}


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_ordered(fn: Callable, payloads: Sequence[Any],
                jobs: Optional[int] = None) -> List[Dict[str, Any]]:
    """
    Apply fn to every payload, results in payload order.

    jobs=1 runs inline in this process. Otherwise a process pool is used:
    mpmath's working precision is process-global, so threads would race on it.
    fn and the payloads must be picklable (module-level functions, plain data).
    """
    payloads = list(payloads)
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")

    if jobs == 1 or len(payloads) <= 1:
        return [run_task(fn, payload) for payload in payloads]

    workers = min(jobs, len(payloads))
    logger.debug(f"dispatching {len(payloads)} tasks to {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_task, fn, payload) for payload in payloads]
        results = []
        for future in futures:
            try:
                results.append(future.result())
            except Exception as e:
                # pool breakage (worker killed, unpicklable result)
                results.append({"status": "error", "message": f"{type(e).__name__}: {e}"})
        return results
