"""Reproducible independent random streams for replicated simulations.

Every replication i of an experiment with master seed s draws from the
generator ``substream(s, i)``.  Streams are statistically independent,
deterministic in (s, i), and independent of how replications are batched
or scheduled across workers, so parallel runs reproduce serial runs
bitwise.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for replication ``index`` of an experiment seeded ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
