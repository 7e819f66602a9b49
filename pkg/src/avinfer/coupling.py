"""Monte Carlo laboratory for the time-uniform boundary-crossing laws.

Verifies, by direct simulation, the distributional facts the monitoring
formulas rest on:

* the sup of ``W(t)^2/t - log t`` over t >= 1 for a Wiener path follows
  the Robbins-Siegmund law;
* the sup of ``S_k^2/(sigma^2 k) - log(k/m)`` for centered, standardized
  partial sums converges to the same law as m grows, whatever the
  increment distribution;
* the standardized sums cross the root-log boundary at the rate that law
  predicts;
* partial sums stay inside a loose iterated-logarithm envelope.

The infinite suprema are truncated at the configured horizon and the
Wiener path is discretized; both truncations bias every sup sample
*downward* (missed late or between-grid maxima), which the acceptance
tolerances absorb.  Replications draw from per-replication substreams, so
results are reproducible and independent of worker scheduling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .families import Family
from .mean import boundary
from .rng import substream
from ._parallel import parallel_chunks

__all__ = [
    "PathConfig",
    "EmpiricalCdf",
    "ks_distance",
    "simulate_wiener_sup",
    "wiener_sup_samples",
    "simulate_partial_sum_sup",
    "partial_sum_sup_samples",
    "boundary_crossing_rate",
    "LilReport",
    "default_lil_grid",
    "lil_envelope_check",
    "write_samples_csv",
]

_CHUNK_STEPS = 1_000_000


@dataclass(frozen=True)
class PathConfig:
    """Simulation geometry for one family of sup samples.

    ``horizon`` is T for the Wiener sup (continuous time, grid step
    ``step``) or K for discrete partial sums (step fixed at 1).
    """

    horizon: float
    step: float
    replications: int
    seed: int
    m: int = 1

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.horizon > self.m:
            raise ValueError(f"horizon must exceed m, got {self.horizon} <= {self.m}")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")


class EmpiricalCdf:
    """Right-continuous empirical CDF of a sample: fraction of values <= x."""

    def __init__(self, values) -> None:
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("empty sample")
        self.values = np.sort(values)
        self.count = self.values.size

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.count


def ks_distance(samples, cdf: Callable[[float], float]) -> float:
    """Kolmogorov-Smirnov distance sup_x |F_hat(x) - F(x)|.

    Both one-sided discrepancies are evaluated at the sample points, which
    is where the sup of the difference against a continuous ``cdf`` is
    attained.
    """
    ecdf = samples if isinstance(samples, EmpiricalCdf) else EmpiricalCdf(samples)
    v = ecdf.values
    n = ecdf.count
    F = np.fromiter((cdf(x) for x in v), dtype=float, count=n)
    steps = np.arange(1, n + 1) / n
    d_plus = float(np.max(steps - F))
    d_minus = float(np.max(F - (steps - 1.0 / n)))
    return max(d_plus, d_minus, 0.0)


def _wiener_grid_blocks(horizon: float, step: float):
    """Precomputed (1/t, log t) blocks for the grid t = 1 + step, ..., T."""
    nsteps = int(round((horizon - 1.0) / step))
    blocks = []
    done = 0
    while done < nsteps:
        c = min(_CHUNK_STEPS, nsteps - done)
        t = 1.0 + step * (done + np.arange(1, c + 1))
        blocks.append((c, 1.0 / t, np.log(t)))
        done += c
    return blocks


def _wiener_sup_path(rng: np.random.Generator, step: float, blocks) -> float:
    w = float(rng.standard_normal())  # W(1)
    best = w * w  # the t = 1 grid point, where log t = 0
    sqrt_step = math.sqrt(step)
    for c, inv_t, log_t in blocks:
        inc = rng.standard_normal(c)
        inc *= sqrt_step
        path = np.cumsum(inc)
        path += w
        w = float(path[-1])
        np.square(path, out=path)
        path *= inv_t
        path -= log_t
        m = float(path.max())
        if m > best:
            best = m
    return best


def simulate_wiener_sup(cfg: PathConfig, rng: np.random.Generator) -> float:
    """One sample of ``max over the grid t in {1, 1+step, ..., T}`` of
    ``W(t)^2/t - log t``, with W built from independent Gaussian increments
    of variance ``step``."""
    return _wiener_sup_path(rng, cfg.step, _wiener_grid_blocks(cfg.horizon, cfg.step))


def _wiener_worker(payload, lo, n):
    horizon, step, seed = payload
    blocks = _wiener_grid_blocks(horizon, step)
    out = np.empty(n)
    for i in range(n):
        out[i] = _wiener_sup_path(substream(seed, lo + i), step, blocks)
    return out


def wiener_sup_samples(cfg: PathConfig, workers: int | None = None) -> np.ndarray:
    """cfg.replications independent Wiener sup samples (parallel over paths)."""
    parts = parallel_chunks(
        _wiener_worker, (cfg.horizon, cfg.step, cfg.seed), cfg.replications,
        workers=workers, chunk=200,
    )
    return np.concatenate(parts)


def _standardized_sums(family: Family, rng: np.random.Generator, horizon: int) -> np.ndarray:
    x = family.sample(rng, horizon)
    if family.mean != 0.0:
        x = x - family.mean
    return np.cumsum(x)


def simulate_partial_sum_sup(
    family: Family, m: int, horizon: int, rng: np.random.Generator
) -> float:
    """One sample of ``max over k in {m..K}`` of
    ``S_k^2 / (sigma^2 k) - log(k/m)`` for centered partial sums S_k."""
    if m < 1 or horizon < m:
        raise ValueError(f"need horizon >= m >= 1, got m={m}, horizon={horizon}")
    if family.variance == 0.0:
        return 0.0
    s = _standardized_sums(family, rng, horizon)[m - 1 :]
    k = np.arange(m, horizon + 1, dtype=float)
    vals = s * s / (family.variance * k) - (np.log(k) - math.log(m))
    return float(vals.max())


def _sum_sup_worker(payload, lo, n):
    family, m, horizon, seed = payload
    out = np.empty(n)
    if family.variance == 0.0:
        out.fill(0.0)
        return out
    k = np.arange(m, horizon + 1, dtype=float)
    penalty = np.log(k) - math.log(m)
    scale = family.variance * k
    for i in range(n):
        s = _standardized_sums(family, substream(seed, lo + i), horizon)[m - 1 :]
        out[i] = np.max(s * s / scale - penalty)
    return out


def partial_sum_sup_samples(
    family: Family, cfg: PathConfig, workers: int | None = None
) -> np.ndarray:
    """cfg.replications sup samples for ``family`` partial sums on
    [cfg.m, cfg.horizon]."""
    parts = parallel_chunks(
        _sum_sup_worker, (family, cfg.m, int(cfg.horizon), cfg.seed),
        cfg.replications, workers=workers, chunk=500,
    )
    return np.concatenate(parts)


def _crossing_worker(payload, lo, n):
    family, x, m, horizon, seed = payload
    out = np.zeros(n, dtype=bool)
    ks = range(m, horizon + 1)
    thresh = np.array([boundary(k, m, x) for k in ks])
    thresh *= np.sqrt(np.arange(m, horizon + 1, dtype=float))
    if family.variance > 0.0:
        thresh = thresh * math.sqrt(family.variance)
    for i in range(n):
        s = _standardized_sums(family, substream(seed, lo + i), horizon)[m - 1 :]
        out[i] = bool(np.any(np.abs(s) >= thresh))
    return out


def boundary_crossing_rate(
    family: Family,
    x: float,
    m: int,
    horizon: int,
    replications: int,
    seed: int,
    workers: int | None = None,
) -> float:
    """Fraction of replications whose standardized partial sum ever satisfies
    ``|S_k| / sqrt(k) >= boundary(k, m, x)`` for some k in [m, horizon].

    Deliberately re-walks each path against the boundary function instead
    of thresholding sup samples, so the two routes can cross-check each
    other under shared seeds.
    """
    parts = parallel_chunks(
        _crossing_worker, (family, float(x), m, horizon, seed),
        replications, workers=workers, chunk=500,
    )
    return float(np.concatenate(parts).mean())


@dataclass(frozen=True)
class LilReport:
    """Summary of an iterated-logarithm envelope check."""

    family: str
    level: float
    median_max_ratio: float
    exceed_fraction: float
    replications: int
    n_grid: np.ndarray
    max_ratios: np.ndarray


def default_lil_grid(lo: int = 100, hi: int = 1_000_000, points: int = 20) -> np.ndarray:
    """Log-spaced integer checkpoints, the natural spacing for fluctuations
    that live on a log-log scale."""
    return np.unique(np.round(np.geomspace(lo, hi, points)).astype(np.int64))


def _lil_worker(payload, lo, n):
    family, grid, seed = payload
    out = np.empty(n)
    horizon = int(grid[-1])
    if family.variance == 0.0:
        out.fill(0.0)
        return out
    env = np.sqrt(2.0 * family.variance * grid * np.log(np.log(grid)))
    for i in range(n):
        s = _standardized_sums(family, substream(seed, lo + i), horizon)
        out[i] = float(np.max(np.abs(s[grid - 1]) / env))
    return out


def lil_envelope_check(
    family: Family,
    n_grid: np.ndarray | None = None,
    replications: int = 500,
    seed: int = 0,
    level: float = 1.5,
    workers: int | None = None,
) -> LilReport:
    """Per replication, the max over the checkpoints of
    ``|S_k| / sqrt(2 sigma^2 k log log k)``; reports the sample median and
    the fraction of replications exceeding ``level``."""
    grid = default_lil_grid() if n_grid is None else np.asarray(n_grid, dtype=np.int64)
    grid = np.unique(grid)
    if grid.size == 0:
        raise ValueError("empty checkpoint grid")
    if grid[0] < 8 or grid[-1] > 1_000_000:
        raise ValueError(
            f"checkpoints must lie within [8, 1e6] (log log must be positive), "
            f"got [{grid[0]}, {grid[-1]}]"
        )
    parts = parallel_chunks(
        _lil_worker, (family, grid, seed), replications, workers=workers, chunk=50,
    )
    ratios = np.concatenate(parts)
    return LilReport(
        family=family.name,
        level=level,
        median_max_ratio=float(np.median(ratios)),
        exceed_fraction=float(np.mean(ratios > level)),
        replications=replications,
        n_grid=grid,
        max_ratios=ratios,
    )


def write_samples_csv(path, values) -> None:
    """Emit a sample set as CSV with columns ``replication,value``."""
    values = np.asarray(values, dtype=float).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "value"])
        for i, v in enumerate(values):
            w.writerow([i, f"{v:.17g}"])
