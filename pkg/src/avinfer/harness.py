"""Replicated Monte Carlo experiments over the anytime-valid procedures.

Four experiment kinds:

* ``mean-calibration``: time-uniform type-I error of the anytime mean test
  under a zero-mean family (fraction of replications that have rejected at
  or before each k).
* ``mean-coverage``: time-uniform miscoverage of the confidence sequence
  for a family with known (possibly shifted) mean.
* ``cit-null`` / ``cit-alternative``: the sequential conditional-
  independence monitor against the fixed-n batch test re-applied naively
  at every checkpoint as the sample accumulates.  The batch curve is the
  reject-ever-by-k rate of that repeated naive testing, which is the
  continuous-monitoring abuse the sequential test exists to avoid.

Replications are deterministic in (seed, replication index) and are
distributed across worker processes; parallel runs reproduce serial runs
bitwise.  The mean engines run the same one-pass update recurrence as
:class:`avinfer.streaming.MomentAccumulator`, vectorized across
replications, so the curves describe exactly what the library computes
observation by observation.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from . import __version__ as _version
from ._parallel import parallel_chunks
from .families import cit_stream, get_family
from .gcm import (
    DEGENERACY_EPS,
    GcmState,
    KernelRegressor,
    KnnRegressor,
    Triplet,
    default_knn_rule,
    gcm_evaluate,
    gcm_update,
)
from .rng import substream
from .rsdist import normal_sf, rs_quantile

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RejectionCurve",
    "CitCurves",
    "run_mean_calibration",
    "run_mean_calibration_multi",
    "run_mean_coverage",
    "run_cit_experiment",
    "default_batch_grid",
    "write_curve_csv",
    "write_experiment",
    "REGRESSORS",
]

KINDS = ("mean-calibration", "mean-coverage", "cit-null", "cit-alternative")
REGRESSORS = {"knn": KnnRegressor, "kernel": KernelRegressor}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offender."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"config field '{field}': {message}")
        self.field = field


_DEFAULTS = {"m": 300, "horizon": 10_000, "alpha": 0.05, "shift": 0.0, "rho": 0.5}
_TYPES = {
    "kind": str,
    "family": str,
    "shift": float,
    "d": int,
    "regressor": str,
    "rho": float,
    "m": int,
    "horizon": int,
    "alpha": float,
    "replications": int,
    "seed": int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo run.  ``family``/``shift`` apply to the mean kinds,
    ``d``/``regressor``/``rho`` to the CIT kinds."""

    kind: str
    replications: int
    seed: int
    family: str = "normal"
    shift: float = 0.0
    d: int = 1
    regressor: str = "knn"
    rho: float = 0.5
    m: int = 300
    horizon: int = 10_000
    alpha: float = 0.05

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}, got {self.kind!r}")
        if self.m < 1:
            raise ConfigError("m", f"must be >= 1, got {self.m}")
        if self.horizon < self.m:
            raise ConfigError("horizon", f"must be >= m={self.m}, got {self.horizon}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha}")
        if self.replications < 1:
            raise ConfigError("replications", f"must be >= 1, got {self.replications}")
        if self.kind.startswith("mean"):
            try:
                get_family(self.family)
            except ValueError as e:
                raise ConfigError("family", str(e)) from None
        else:
            if self.d < 1:
                raise ConfigError("d", f"must be >= 1, got {self.d}")
            if self.regressor not in REGRESSORS:
                raise ConfigError(
                    "regressor",
                    f"must be one of {', '.join(sorted(REGRESSORS))}, got {self.regressor!r}",
                )
        return self

    @staticmethod
    def from_text(text: str) -> "ExperimentConfig":
        """Parse a flat ``key = value`` config (one pair per line, '#'
        comments).  Raises :class:`ConfigError` naming the offending field."""
        raw: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(
                    "syntax", f"line {lineno}: expected 'key = value', got {line.strip()!r}"
                )
            key, value = (part.strip() for part in stripped.split("=", 1))
            if key in raw:
                raise ConfigError(key, f"line {lineno}: duplicate key")
            raw[key] = value
        kwargs = {}
        for key, value in raw.items():
            if key not in _TYPES:
                raise ConfigError(key, "unknown field")
            typ = _TYPES[key]
            try:
                kwargs[key] = typ(value)
            except ValueError:
                raise ConfigError(key, f"expected {typ.__name__}, got {value!r}") from None
        kind = kwargs.get("kind")
        if kind is None:
            raise ConfigError("kind", "missing required field")
        for req in ("replications", "seed"):
            if req not in kwargs:
                raise ConfigError(req, "missing required field")
        if kind in ("mean-calibration", "mean-coverage") and "family" not in kwargs:
            raise ConfigError("family", "missing required field for mean experiments")
        if kind in ("cit-null", "cit-alternative"):
            for req in ("d", "regressor"):
                if req not in kwargs:
                    raise ConfigError(req, "missing required field for CIT experiments")
        return ExperimentConfig(**kwargs).validate()

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_text(fh.read())

    def canonical_text(self) -> str:
        pairs = sorted((f.name, getattr(self, f.name)) for f in fields(self))
        return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"


@dataclass(frozen=True)
class RejectionCurve:
    """Cumulative rejection (or miscoverage) fraction at each k in
    [m, horizon]; nondecreasing by construction."""

    label: str
    m: int
    horizon: int
    replications: int
    values: np.ndarray

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.m, self.horizon + 1)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def value_at(self, k: int) -> float:
        if not self.m <= k <= self.horizon:
            raise ValueError(f"k={k} outside [{self.m}, {self.horizon}]")
        return float(self.values[k - self.m])


def _curve_from_first_crossings(
    first: np.ndarray, m: int, horizon: int, label: str
) -> RejectionCurve:
    """first[i] = earliest rejection index of replication i (horizon+1 if
    none)."""
    length = horizon - m + 1
    idx = first - m
    counts = np.bincount(np.minimum(idx, length), minlength=length + 1)[:length]
    values = np.cumsum(counts) / first.size
    return RejectionCurve(label, m, horizon, first.size, values)


# --------------------------------------------------------------------------
# Mean experiments
# --------------------------------------------------------------------------


def _mean_worker(payload, lo, n):
    family, center, m, K, qs, seed = payload
    X = np.empty((n, K))
    for i in range(n):
        X[i] = family.sample(substream(seed, lo + i), K)
    cols = np.ascontiguousarray(X.T)
    del X
    mean = np.zeros(n)
    m2 = np.zeros(n)
    first = np.full((len(qs), n), K + 1, dtype=np.int64)
    logm = math.log(m)
    neg_inf = np.full(n, -np.inf)
    for k in range(1, K + 1):
        x = cols[k - 1]
        delta = x - mean
        mean += delta / k
        m2 += delta * (x - mean)
        if k < m:
            continue
        var = m2 / k
        c = mean - center
        stat = np.divide(k * c * c, var, out=neg_inf.copy(), where=var > 0.0)
        excess = stat - (math.log(k) - logm)
        for j, q in enumerate(qs):
            hit = (excess >= q) & (first[j] > K)
            if hit.any():
                first[j][hit] = k
    return first


def _run_mean(cfg: ExperimentConfig, center: float, alphas, label, workers):
    cfg.validate()
    family = get_family(cfg.family, cfg.shift)
    qs = tuple(rs_quantile(1.0 - a) for a in alphas)
    parts = parallel_chunks(
        _mean_worker,
        (family, center, cfg.m, cfg.horizon, qs, cfg.seed),
        cfg.replications,
        workers=workers,
        chunk=500,
    )
    first = np.concatenate(parts, axis=1)
    return {
        a: _curve_from_first_crossings(first[j], cfg.m, cfg.horizon, label)
        for j, a in enumerate(alphas)
    }


def run_mean_calibration(
    cfg: ExperimentConfig, workers: int | None = None
) -> RejectionCurve:
    """Cumulative fraction of replications whose anytime p-value for the
    zero-mean null has dipped to alpha or below by each k."""
    family = get_family(cfg.family, cfg.shift)
    if family.mean != 0.0:
        raise ConfigError("family", f"mean-calibration needs a zero-mean family, "
                                    f"got {family.name} with mean {family.mean}")
    return _run_mean(cfg, 0.0, (cfg.alpha,), "mean-calibration", workers)[cfg.alpha]


def run_mean_calibration_multi(
    cfg: ExperimentConfig, alphas: Sequence[float], workers: int | None = None
) -> dict[float, RejectionCurve]:
    """Calibration curves at several levels evaluated on shared sample
    paths (one simulated stream, one threshold per alpha)."""
    family = get_family(cfg.family, cfg.shift)
    if family.mean != 0.0:
        raise ConfigError("family", "mean-calibration needs a zero-mean family")
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {a}")
    return _run_mean(cfg, 0.0, tuple(alphas), "mean-calibration", workers)


def run_mean_coverage(
    cfg: ExperimentConfig, workers: int | None = None
) -> RejectionCurve:
    """Cumulative fraction of replications whose confidence sequence has
    ever excluded the true mean by each k."""
    family = get_family(cfg.family, cfg.shift)
    return _run_mean(cfg, family.mean, (cfg.alpha,), "mean-coverage", workers)[cfg.alpha]


# --------------------------------------------------------------------------
# Conditional-independence experiments
# --------------------------------------------------------------------------


def default_batch_grid(m: int, horizon: int, points: int = 12) -> np.ndarray:
    """Checkpoints for the repeated naive batch test.  Refitting the batch
    regressors at every single k is cubic in the horizon, so the naive
    monitor is sampled at log-spaced k instead; the resulting reject-ever
    curve is a step function and, if anything, an undercount."""
    return np.unique(np.round(np.geomspace(m, horizon, points)).astype(np.int64))


def _seq_pass_knn(Zt, Xt, Yt, Ze, Xe, Ye, m, q, trace=None):
    """First rejection time of the sequential monitor per replication,
    vectorized across replications.  Identical arithmetic to running
    gcm_update with KnnRegressor and reading the anytime p-value; for
    d >= 2 the neighbour ranking drops the constant |query|^2 term from
    the squared distance, which cannot change the selected set."""
    R, K, d = Zt.shape
    first = np.full(R, K + 1, dtype=np.int64)
    alive = np.arange(R)
    mean = np.zeros(R)
    m2 = np.zeros(R)
    logm = math.log(m)
    ZtN2 = np.einsum("rnd,rnd->rn", Zt, Zt) if d > 1 else None
    for n in range(1, K + 1):
        if d == 1:
            d2 = (Zt[:, :n, 0] - Ze[:, n - 1, 0][:, None]) ** 2
        else:
            d2 = np.matmul(Zt[:, :n, :], Ze[:, n - 1, :, None])[:, :, 0]
            d2 *= -2.0
            d2 += ZtN2[:, :n]
        kk = min(default_knn_rule(n), n)
        if kk >= n:
            px = Xt[:, :n].mean(axis=1)
            py = Yt[:, :n].mean(axis=1)
        else:
            idx = np.argpartition(d2, kk - 1, axis=1)[:, :kk]
            px = np.take_along_axis(Xt[:, :n], idx, axis=1).mean(axis=1)
            py = np.take_along_axis(Yt[:, :n], idx, axis=1).mean(axis=1)
        resid = (Xe[:, n - 1] - px) * (Ye[:, n - 1] - py)
        if trace is not None:
            trace.append((alive.copy(), resid.copy()))
        delta = resid - mean
        mean += delta / n
        m2 += delta * (resid - mean)
        if n < m:
            continue
        var = m2 / n
        ok = var >= DEGENERACY_EPS
        stat = np.divide(n * mean * mean, var, out=np.full_like(mean, -np.inf), where=ok)
        hit = stat - (math.log(n) - logm) >= q
        if hit.any():
            # settled replications drop out; the survivors' arithmetic is
            # unchanged, so results do not depend on the compaction
            first[alive[hit]] = n
            keep = ~hit
            alive = alive[keep]
            if alive.size == 0:
                break
            Zt, Xt, Yt = Zt[keep], Xt[keep], Yt[keep]
            Ze, Xe, Ye = Ze[keep], Xe[keep], Ye[keep]
            mean, m2 = mean[keep], m2[keep]
            if ZtN2 is not None:
                ZtN2 = ZtN2[keep]
    return first


def _knn1d_batch_means(zsort, prefx, prefy, kk, zq):
    """Exact 1-D k-nearest-neighbour window means via a sorted copy of the
    training z's; the optimal window is the contiguous run of kk sorted
    values with the smallest covering radius around each query."""
    k = zsort.size
    pos = np.searchsorted(zsort, zq)
    starts = np.clip(pos[:, None] + np.arange(-kk, 1)[None, :], 0, k - kk)
    width = np.maximum(zq[:, None] - zsort[starts], zsort[starts + kk - 1] - zq[:, None])
    best = starts[np.arange(zq.size), np.argmin(width, axis=1)]
    px = (prefx[best + kk] - prefx[best]) / kk
    py = (prefy[best + kk] - prefy[best]) / kk
    return px, py


def _knn_nd_batch_means(zt, xt, yt, kk, zq):
    """k-nearest-neighbour means for d >= 2 via a compiled k-d tree: same
    estimator as the regressor's linear scan, a few times faster on the
    dense batch-refit workload."""
    from scipy.spatial import cKDTree

    _, idx = cKDTree(zt).query(zq, k=kk, workers=1)
    idx = idx.reshape(zq.shape[0], kk)
    return xt[idx].mean(axis=1), yt[idx].mean(axis=1)


def _batch_first_reject(zt, xt, yt, ze, xe, ye, grid, alpha):
    """Index into ``grid`` of the first naive fixed-n rejection, or
    len(grid) if the repeated batch test never rejects."""
    d = zt.shape[1]
    for g, k in enumerate(grid):
        k = int(k)
        kk = min(default_knn_rule(k), k)
        if kk >= k:
            px = np.full(k, xt[:k].mean())
            py = np.full(k, yt[:k].mean())
        elif d == 1:
            order = np.argsort(zt[:k, 0], kind="stable")
            zsort = zt[:k, 0][order]
            prefx = np.concatenate([[0.0], np.cumsum(xt[:k][order])])
            prefy = np.concatenate([[0.0], np.cumsum(yt[:k][order])])
            px, py = _knn1d_batch_means(zsort, prefx, prefy, kk, ze[:k, 0])
        else:
            px, py = _knn_nd_batch_means(zt[:k], xt[:k], yt[:k], kk, ze[:k])
        resid = (xe[:k] - px) * (ye[:k] - py)
        var = resid.var()
        if var < DEGENERACY_EPS:
            continue
        stat = math.sqrt(k) * resid.mean() / math.sqrt(var)
        if 2.0 * normal_sf(abs(stat)) <= alpha:
            return g
    return len(grid)


def _cit_knn_worker(payload, lo, n):
    d, rho, m, K, q, alpha, grid, seed = payload
    Zt = np.empty((n, K, d))
    Xt = np.empty((n, K))
    Yt = np.empty((n, K))
    Ze = np.empty((n, K, d))
    Xe = np.empty((n, K))
    Ye = np.empty((n, K))
    for i in range(n):
        stream = cit_stream(substream(seed, lo + i), K, d, rho)
        Zt[i], Xt[i], Yt[i] = stream["train"]
        Ze[i], Xe[i], Ye[i] = stream["eval"]
    first = _seq_pass_knn(Zt, Xt, Yt, Ze, Xe, Ye, m, q)
    batch_first = np.empty(n, dtype=np.int64)
    for i in range(n):
        batch_first[i] = _batch_first_reject(
            Zt[i], Xt[i], Yt[i], Ze[i], Xe[i], Ye[i], grid, alpha
        )
    return first, batch_first


def _cit_generic_worker(payload, lo, n):
    d, rho, m, K, q, alpha, grid, seed, regressor = payload
    factory = REGRESSORS[regressor]
    first = np.full(n, K + 1, dtype=np.int64)
    batch_first = np.empty(n, dtype=np.int64)
    logm = math.log(m)
    for i in range(n):
        stream = cit_stream(substream(seed, lo + i), K, d, rho)
        zt, xt, yt = stream["train"]
        ze, xe, ye = stream["eval"]
        state = GcmState(factory(), factory())
        for k in range(1, K + 1):
            gcm_update(
                state,
                Triplet(xe[k - 1], ye[k - 1], ze[k - 1]),
                Triplet(xt[k - 1], yt[k - 1], zt[k - 1]),
            )
            if k < m or state.degenerate:
                continue
            acc = state.residual_stats
            stat = k * acc.mean * acc.mean / acc.variance
            if stat - (math.log(k) - logm) >= q:
                first[i] = k
                break
        batch_first[i] = _batch_generic_first_reject(
            zt, xt, yt, ze, xe, ye, grid, alpha, factory
        )
    return first, batch_first


def _batch_generic_first_reject(zt, xt, yt, ze, xe, ye, grid, alpha, factory):
    from .gcm import batch_gcm_p_value, DegenerateVarianceError

    for g, k in enumerate(grid):
        k = int(k)
        try:
            p = batch_gcm_p_value(
                (xe[:k], ye[:k], ze[:k]), (xt[:k], yt[:k], zt[:k]), factory
            )
        except DegenerateVarianceError:
            continue
        if p <= alpha:
            return g
    return len(grid)


@dataclass(frozen=True)
class CitCurves:
    """Sequential vs repeated-naive-batch rejection curves."""

    seqgcm: RejectionCurve
    batchgcm: RejectionCurve
    batch_grid: np.ndarray


def run_cit_experiment(
    cfg: ExperimentConfig, workers: int | None = None
) -> CitCurves:
    """Cumulative rejection curves for the sequential monitor and for the
    naive batch test repeated over ``default_batch_grid`` checkpoints."""
    cfg.validate()
    if cfg.kind not in ("cit-null", "cit-alternative"):
        raise ConfigError("kind", f"expected a CIT kind, got {cfg.kind!r}")
    rho = cfg.rho if cfg.kind == "cit-alternative" else 0.0
    grid = default_batch_grid(cfg.m, cfg.horizon)
    q = rs_quantile(1.0 - cfg.alpha)
    if cfg.regressor == "knn":
        payload = (cfg.d, rho, cfg.m, cfg.horizon, q, cfg.alpha, tuple(grid), cfg.seed)
        parts = parallel_chunks(
            _cit_knn_worker, payload, cfg.replications, workers=workers, chunk=64
        )
    else:
        payload = (
            cfg.d, rho, cfg.m, cfg.horizon, q, cfg.alpha, tuple(grid), cfg.seed,
            cfg.regressor,
        )
        parts = parallel_chunks(
            _cit_generic_worker, payload, cfg.replications, workers=workers, chunk=16
        )
    first = np.concatenate([p[0] for p in parts])
    batch_first_grid = np.concatenate([p[1] for p in parts])
    batch_first = np.where(
        batch_first_grid < len(grid),
        np.asarray(grid)[np.minimum(batch_first_grid, len(grid) - 1)],
        cfg.horizon + 1,
    )
    return CitCurves(
        seqgcm=_curve_from_first_crossings(first, cfg.m, cfg.horizon, "seqgcm"),
        batchgcm=_curve_from_first_crossings(batch_first, cfg.m, cfg.horizon, "batchgcm"),
        batch_grid=grid,
    )


# --------------------------------------------------------------------------
# File output
# --------------------------------------------------------------------------


def write_curve_csv(path, curve: RejectionCurve) -> None:
    with open(path, "w") as fh:
        fh.write("k,value\n")
        for k, v in zip(curve.ks, curve.values):
            fh.write(f"{k},{v:.17g}\n")


def _write_meta(path, cfg: ExperimentConfig, extra: dict) -> None:
    digest = hashlib.sha256(cfg.canonical_text().encode()).hexdigest()
    lines = {
        "config_sha256": digest,
        "seed": cfg.seed,
        "version": f"avinfer-v{_version}",
        **extra,
    }
    with open(path, "w") as fh:
        for key in sorted(lines):
            fh.write(f"{key} = {lines[key]}\n")


def write_experiment(
    cfg: ExperimentConfig, out_path: str, workers: int | None = None
) -> list[str]:
    """Run ``cfg`` and write curve CSV(s) plus a ``.meta`` sidecar next to
    ``out_path``.  Returns the written paths."""
    cfg.validate()
    base, ext = os.path.splitext(out_path)
    ext = ext or ".csv"
    written = []
    extra = {"kind": cfg.kind}
    if cfg.kind in ("mean-calibration", "mean-coverage"):
        runner = run_mean_calibration if cfg.kind == "mean-calibration" else run_mean_coverage
        curve = runner(cfg, workers=workers)
        write_curve_csv(out_path, curve)
        written.append(out_path)
        extra["curve"] = "cumulative rejection fraction" if cfg.kind == "mean-calibration" \
            else "cumulative miscoverage fraction"
    else:
        curves = run_cit_experiment(cfg, workers=workers)
        for label, curve in (("seqgcm", curves.seqgcm), ("batchgcm", curves.batchgcm)):
            path = f"{base}_{label}{ext}"
            write_curve_csv(path, curve)
            written.append(path)
        extra["batch_grid"] = ",".join(str(int(k)) for k in curves.batch_grid)
        extra["batch_curve"] = (
            "reject-ever-by-k under the naive fixed-n test repeated at each "
            "grid checkpoint"
        )
    meta = base + ".meta"
    _write_meta(meta, cfg, extra)
    written.append(meta)
    return written
