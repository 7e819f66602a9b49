"""Sequential and batch conditional-independence testing via covariance of
regression residuals.

The null is X independent of Y given Z for (x, y, z) triplets.  Two online
regressors estimate E[X|Z] and E[Y|Z] from a training stream that runs in
parallel with the evaluation stream; at each step the product residual

    R_n = (x_n - mu_x(z_n)) * (y_n - mu_y(z_n))

is evaluated on the *evaluation* triplet using regressors trained on
training triplets 1..n (the step-n training triplet is ingested first).
The running statistic is mean(R) / sd(R), and

    p_k = 1 - Psi( k * statistic^2 - log(k/m) )

is an anytime p-value for the conditional-independence null.  Since
k * statistic^2 is exactly the mean-test statistic of the residual stream,
the p-value delegates to :mod:`avinfer.mean` applied to the residual
accumulator.

A fixed-n batch variant is also provided: regressors are fit once on a
held-out sample, residuals are computed for the whole evaluation sample,
and sqrt(n) * statistic is referred to the standard normal (two sided).

Regressors only ever see training triplets; that separation is what makes
the residuals honest, and the test suite enforces it.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import mean as _mean
from .streaming import MomentAccumulator
from .rsdist import normal_sf

__all__ = [
    "DegenerateVarianceError",
    "Triplet",
    "KnnRegressor",
    "KernelRegressor",
    "default_knn_rule",
    "default_bandwidth_rule",
    "GcmState",
    "gcm_update",
    "gcm_statistic",
    "gcm_p_value",
    "gcm_evaluate",
    "batch_gcm_statistic",
    "batch_gcm_p_value",
    "DEGENERACY_EPS",
]

# Residual variance below this is treated as degenerate (it is clamped at 0
# when mean-of-squares rounding would send it negative).
DEGENERACY_EPS = 1e-12


class DegenerateVarianceError(ValueError):
    """The residual stream has (numerically) zero variance."""


class Triplet(NamedTuple):
    """One (x, y, z) observation; z is a 1-D float array of fixed length."""

    x: float
    y: float
    z: np.ndarray

    @staticmethod
    def of(x: float, y: float, z) -> "Triplet":
        return Triplet(float(x), float(y), np.atleast_1d(np.asarray(z, dtype=float)))


def default_knn_rule(n: int) -> int:
    """Neighbour count k(n) = ceil(n^(2/3}), a standard consistency rule."""
    return int(math.ceil(n ** (2.0 / 3.0)))


def default_bandwidth_rule(n: int, scale: np.ndarray) -> np.ndarray:
    """Per-coordinate bandwidth n^(-1/(4+d)) * scale (coordinate std)."""
    d = scale.shape[0]
    return n ** (-1.0 / (4.0 + d)) * scale


class _TrainingStore:
    """Append-only storage of (z, target) training pairs, growable arrays."""

    def __init__(self) -> None:
        self._z: np.ndarray | None = None
        self._t = np.empty(8)
        self.n = 0

    @property
    def dim(self) -> int | None:
        return None if self._z is None else self._z.shape[1]

    def append(self, z: np.ndarray, target: float) -> None:
        if self._z is None:
            self._z = np.empty((8, z.shape[0]))
        elif z.shape[0] != self._z.shape[1]:
            raise ValueError(
                f"z has dimension {z.shape[0]}, expected {self._z.shape[1]}"
            )
        if self.n == self._z.shape[0]:
            self._z = np.concatenate([self._z, np.empty_like(self._z)])
            self._t = np.concatenate([self._t, np.empty_like(self._t)])
        self._z[self.n] = z
        self._t[self.n] = target
        self.n += 1

    def z_view(self) -> np.ndarray:
        return self._z[: self.n]

    def t_view(self) -> np.ndarray:
        return self._t[: self.n]


def _as_point(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.ndim != 1:
        raise ValueError("z must be a scalar or 1-D vector")
    if not np.all(np.isfinite(z)):
        raise ValueError("z must be finite")
    return z


class KnnRegressor:
    """k-nearest-neighbour regression on an append-only training list.

    Prediction is the average target of the k(n) nearest stored z's in
    Euclidean distance, found by a linear scan (a spatial index is a
    deliberate non-feature at this scale).  With no training points the
    prediction falls back to 0.0, the mean of an empty target set.
    """

    def __init__(self, k_of_n: Callable[[int], int] = default_knn_rule) -> None:
        self._rule = k_of_n
        self._store = _TrainingStore()

    @property
    def n_train(self) -> int:
        return self._store.n

    def fit_update(self, z, target: float) -> None:
        target = float(target)
        if not math.isfinite(target):
            raise ValueError("target must be finite")
        self._store.append(_as_point(z), target)

    def predict(self, z) -> float:
        n = self._store.n
        if n == 0:
            return 0.0
        z = _as_point(z)
        t = self._store.t_view()
        kk = min(max(1, int(self._rule(n))), n)
        if kk >= n:
            return float(t.mean())
        d2 = np.square(self._store.z_view() - z).sum(axis=1)
        idx = np.argpartition(d2, kk - 1)[:kk]
        return float(t[idx].mean())

    def predict_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        n = self._store.n
        if n == 0:
            return np.zeros(Z.shape[0])
        t = self._store.t_view()
        kk = min(max(1, int(self._rule(n))), n)
        if kk >= n:
            return np.full(Z.shape[0], t.mean())
        out = np.empty(Z.shape[0])
        zs = self._store.z_view()
        block = max(1, int(2_000_000 // max(1, n)))
        for lo in range(0, Z.shape[0], block):
            hi = min(lo + block, Z.shape[0])
            d2 = np.square(zs[None, :, :] - Z[lo:hi, None, :]).sum(axis=2)
            idx = np.argpartition(d2, kk - 1, axis=1)[:, :kk]
            out[lo:hi] = t[idx].mean(axis=1)
        return out


class KernelRegressor:
    """Nadaraya-Watson regression with a Gaussian product kernel.

    Bandwidths come from ``bandwidth_rule(n, scale)`` where ``scale`` is the
    per-coordinate standard deviation of the stored training z's (1.0 for a
    constant coordinate).  When every kernel weight underflows to zero the
    prediction falls back to the global training mean.
    """

    def __init__(
        self,
        bandwidth_rule: Callable[[int, np.ndarray], np.ndarray] = default_bandwidth_rule,
    ) -> None:
        self._rule = bandwidth_rule
        self._store = _TrainingStore()
        self._sum = None
        self._sumsq = None

    @property
    def n_train(self) -> int:
        return self._store.n

    def fit_update(self, z, target: float) -> None:
        target = float(target)
        if not math.isfinite(target):
            raise ValueError("target must be finite")
        z = _as_point(z)
        self._store.append(z, target)
        if self._sum is None:
            self._sum = np.zeros_like(z)
            self._sumsq = np.zeros_like(z)
        self._sum += z
        self._sumsq += z * z

    def _bandwidth(self) -> np.ndarray:
        n = self._store.n
        var = self._sumsq / n - (self._sum / n) ** 2
        scale = np.sqrt(np.maximum(var, 0.0))
        scale[scale == 0.0] = 1.0
        h = np.asarray(self._rule(n, scale), dtype=float)
        return np.maximum(h, 1e-300)

    def predict(self, z) -> float:
        return float(self.predict_batch(np.atleast_2d(_as_point(z)))[0])

    def predict_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        n = self._store.n
        if n == 0:
            return np.zeros(Z.shape[0])
        t = self._store.t_view()
        h = self._bandwidth()
        zs = self._store.z_view() / h
        out = np.empty(Z.shape[0])
        globalm = t.mean()
        block = max(1, int(2_000_000 // max(1, n)))
        for lo in range(0, Z.shape[0], block):
            hi = min(lo + block, Z.shape[0])
            d2 = np.square(zs[None, :, :] - (Z[lo:hi] / h)[:, None, :]).sum(axis=2)
            w = np.exp(-0.5 * (d2 - d2.min(axis=1, keepdims=True)))
            mass = w.sum(axis=1)
            num = w @ t
            blockout = np.where(mass > 0.0, num / np.where(mass > 0.0, mass, 1.0), globalm)
            out[lo:hi] = blockout
        return out


class GcmState:
    """State of a sequential conditional-independence monitor.

    Holds the residual accumulator and owns the two online regressors.
    Single-writer; independent streams get independent states.
    """

    def __init__(self, regressor_x, regressor_y) -> None:
        self.residual_stats = MomentAccumulator()
        self.regressor_x = regressor_x
        self.regressor_y = regressor_y

    @property
    def n(self) -> int:
        return self.residual_stats.count

    @property
    def degenerate(self) -> bool:
        return self.n > 0 and self.residual_stats.variance < DEGENERACY_EPS


def gcm_update(state: GcmState, eval_triplet: Triplet, train_triplet: Triplet) -> GcmState:
    """Advance one logical time step: train on ``train_triplet``, then
    evaluate the product residual at ``eval_triplet``.

    The training triplet is ingested before prediction, so the residual at
    step n uses regressors trained on training points 1..n while remaining
    independent of every evaluation point.
    """
    state.regressor_x.fit_update(train_triplet.z, train_triplet.x)
    state.regressor_y.fit_update(train_triplet.z, train_triplet.y)
    px = state.regressor_x.predict(eval_triplet.z)
    if not math.isfinite(px):
        raise ValueError(f"x-regressor produced a non-finite prediction: {px!r}")
    py = state.regressor_y.predict(eval_triplet.z)
    if not math.isfinite(py):
        raise ValueError(f"y-regressor produced a non-finite prediction: {py!r}")
    resid = (eval_triplet.x - px) * (eval_triplet.y - py)
    state.residual_stats.update(resid)
    return state


def gcm_statistic(state: GcmState) -> float:
    """mean(R) / sd(R) over the residual stream so far."""
    if state.n < 1:
        raise ValueError("statistic of an empty residual stream")
    var = state.residual_stats.variance
    if var < DEGENERACY_EPS:
        raise DegenerateVarianceError(
            f"residual variance {var!r} is numerically zero after n={state.n}"
        )
    return state.residual_stats.mean / math.sqrt(var)

def gcm_p_value(state: GcmState, m: int) -> float:
    """Anytime p-value 1 - Psi(k * statistic^2 - log(k/m)) at k = n.

    Identical, by construction, to the anytime mean-test p-value applied
    to the residual stream.
    """
    _mean._check_start(state.n, m)
    if state.degenerate:
        raise DegenerateVarianceError(
            f"residual variance is numerically zero after n={state.n}"
        )
    return _mean.anytime_p_value(state.residual_stats, m)


def gcm_evaluate(state: GcmState, m: int, alpha: float) -> _mean.AnytimeResult:
    """Monitor record for the residual stream; degenerate states yield
    p = 1 and a point interval instead of an error."""
    return _mean.evaluate(state.residual_stats, m, alpha)


def _as_arrays(data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalize a sequence of Triplets or an (x, y, z) array triple."""
    if isinstance(data, tuple) and len(data) == 3:
        x, y, z = (np.asarray(a, dtype=float) for a in data)
        z = z.reshape(len(x), -1)
    else:
        data = list(data)
        x = np.array([t.x for t in data], dtype=float)
        y = np.array([t.y for t in data], dtype=float)
        z = np.stack([np.atleast_1d(np.asarray(t.z, dtype=float)) for t in data])
    if len(x) == 0:
        raise ValueError("empty data")
    return x, y, z


def batch_gcm_statistic(eval_data, train_data, regressor_factory) -> tuple[float, int]:
    """Fixed-n statistic: fit once on the training sample, compute all
    product residuals on the evaluation sample, return (sqrt(n)-free
    statistic mean/sd, n)."""
    ex, ey, ez = _as_arrays(eval_data)
    tx, ty, tz = _as_arrays(train_data)
    rx = regressor_factory()
    ry = regressor_factory()
    for i in range(len(tx)):
        rx.fit_update(tz[i], tx[i])
        ry.fit_update(tz[i], ty[i])
    resid = (ex - rx.predict_batch(ez)) * (ey - ry.predict_batch(ez))
    n = len(resid)
    mu = resid.mean()
    var = resid.var()  # population-normalized
    if var < DEGENERACY_EPS:
        raise DegenerateVarianceError("batch residual variance is numerically zero")
    return float(mu / math.sqrt(var)), n


def batch_gcm_p_value(eval_data, train_data, regressor_factory) -> float:
    """Two-sided fixed-n p-value 2 * (1 - Phi(|sqrt(n) * statistic|))."""
    stat, n = batch_gcm_statistic(eval_data, train_data, regressor_factory)
    return min(1.0, 2.0 * normal_sf(abs(math.sqrt(n) * stat)))
