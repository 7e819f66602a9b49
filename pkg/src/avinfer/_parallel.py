"""Replication-parallel execution of seeded Monte Carlo chunks.

Workers receive (payload, first_replication_index, count) and must derive
all randomness from per-replication substreams, so the reduction is
independent of chunking and worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["parallel_chunks"]


def parallel_chunks(fn, payload, replications, workers=None, chunk=500):
    """Run ``fn(payload, lo, n)`` over [0, replications) in chunks; returns
    the per-chunk results in replication order."""
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    tasks = [
        (lo, min(chunk, replications - lo)) for lo in range(0, replications, chunk)
    ]
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(tasks)))
    if workers == 1:
        return [fn(payload, lo, n) for lo, n in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(fn, payload, lo, n) for lo, n in tasks]
        return [f.result() for f in futures]
