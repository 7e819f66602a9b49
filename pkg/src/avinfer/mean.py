"""Anytime-valid inference for the mean of a scalar stream.

Given a running accumulator with count k >= m, mean mu_k and population
variance s2_k, the monitored quantities are

    p_k      = 1 - Psi( k * mu_k^2 / s2_k - log(k / m) )
    CS_k(a)  = mu_k +/- s_k * sqrt( [Psi^{-1}(1 - a) + log(k / m)] / k )

where Psi is the Robbins-Siegmund CDF and m is the start index from which
the time-uniform guarantee is invoked.  Rejecting when p_k <= alpha, or
equivalently when 0 falls outside CS_k(alpha), controls the probability of
*ever* rejecting a true zero-mean null across all k >= m (asymptotically
in m, uniformly over distributions with bounded 2+delta moments and
variance bounded away from 0).

All functions are pure in an accumulator snapshot.  log(k/m) is always
computed as log(k) - log(m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rsdist import rs_quantile, rs_survival
from .streaming import MomentAccumulator

__all__ = [
    "SequencingError",
    "AnytimeResult",
    "anytime_p_value",
    "confidence_sequence",
    "anytime_test",
    "evaluate",
    "boundary",
]


class SequencingError(ValueError):
    """Evaluation requested at a time index before the start index m."""


@dataclass(frozen=True)
class AnytimeResult:
    """Snapshot of the monitored inference at time k for start index m.

    ``degenerate`` marks a zero-variance prefix (all observations so far
    identical): the p-value is reported as 1 and the interval collapses to
    the single point mu_k, rather than aborting the monitor.
    """

    k: int
    m: int
    alpha: float
    p_value: float
    lower: float
    upper: float
    reject: bool
    degenerate: bool


def _check_start(k: int, m: int) -> None:
    if m < 1:
        raise ValueError(f"start index m must be >= 1, got {m}")
    if k < m:
        raise SequencingError(f"time index k={k} precedes start index m={m}")


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def anytime_p_value(stats: MomentAccumulator, m: int) -> float:
    """Anytime p-value for the zero-mean null at the current time index.

    Returns 1.0 on a zero-variance prefix (see :class:`AnytimeResult`).
    """
    _check_start(stats.count, m)
    k = stats.count
    var = stats.variance
    if var == 0.0:
        return 1.0
    arg = k * stats.mean * stats.mean / var - (math.log(k) - math.log(m))
    return rs_survival(arg)


def confidence_sequence(
    stats: MomentAccumulator, m: int, alpha: float
) -> tuple[float, float]:
    """Confidence-sequence interval (lower, upper) for the mean at time k."""
    _check_start(stats.count, m)
    alpha = _check_alpha(alpha)
    k = stats.count
    mu = stats.mean
    var = stats.variance
    if var == 0.0:
        return (mu, mu)
    radius = math.sqrt(
        var * (rs_quantile(1.0 - alpha) + math.log(k) - math.log(m)) / k
    )
    return (mu - radius, mu + radius)


def anytime_test(stats: MomentAccumulator, m: int, alpha: float) -> bool:
    """True iff the zero-mean null is rejected at level alpha."""
    alpha = _check_alpha(alpha)
    return anytime_p_value(stats, m) <= alpha


def evaluate(stats: MomentAccumulator, m: int, alpha: float) -> AnytimeResult:
    """Bundle p-value, confidence sequence, and test decision at time k."""
    alpha = _check_alpha(alpha)
    p = anytime_p_value(stats, m)
    lower, upper = confidence_sequence(stats, m, alpha)
    return AnytimeResult(
        k=stats.count,
        m=m,
        alpha=alpha,
        p_value=p,
        lower=lower,
        upper=upper,
        reject=p <= alpha,
        degenerate=stats.variance == 0.0,
    )


def boundary(k: float, m: int, x: float) -> float:
    """Time-uniform threshold for |S_k| / sqrt(k): sqrt(x + log(k/m)).

    A standardized partial sum crosses this boundary at some k >= m with
    limiting probability 1 - Psi(x).  k may be fractional; the boundary is
    a continuous function of time.
    """
    _check_start(k, m)
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"boundary level x must be finite and >= 0, got {x}")
    return math.sqrt(x + math.log(k) - math.log(m))
