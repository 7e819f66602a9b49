"""The Robbins-Siegmund distribution.

The law of ``sup_{t >= 1} { W(t)^2 / t - log t }`` for a standard Wiener
process ``W``, named after the 1970 boundary-crossing computation it comes
from.  Its CDF is

    Psi(r) = 1 - 2 * [  1 - Phi(sqrt(r)) + sqrt(r) * phi(sqrt(r)) ],  r >= 0,

with Phi and phi the standard-normal CDF and density.  Psi plays the role
for time-uniform monitoring that Phi plays for fixed-sample inference: a
running mean-squared statistic compared against ``Psi^{-1}(1 - alpha)``
yields level-alpha inference that is valid at every sample size at once.

Everything here is scalar, pure, and thread-safe.  ``rs_cdf`` is extended
to negative arguments by 0 so that ``1 - Psi(statistic)`` is 1 whenever the
statistic sits below the boundary's zero level: a sub-boundary statistic
carries no evidence.
"""

from __future__ import annotations

import math
from functools import lru_cache

__all__ = [
    "normal_pdf",
    "normal_cdf",
    "normal_sf",
    "rs_cdf",
    "rs_survival",
    "rs_density",
    "rs_quantile",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


def _require_finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def normal_pdf(x: float) -> float:
    """Standard-normal density phi(x)."""
    x = _require_finite(x, "x")
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_cdf(x: float) -> float:
    """Standard-normal CDF Phi(x), via erfc for full-range accuracy."""
    x = _require_finite(x, "x")
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x: float) -> float:
    """Upper tail 1 - Phi(x) without cancellation for large x."""
    x = _require_finite(x, "x")
    return 0.5 * math.erfc(x / _SQRT2)


def rs_survival(r: float) -> float:
    """1 - Psi(r), computed in the cancellation-free form.

    Returns ``2 * [1 - Phi(sqrt(r)) + sqrt(r) * phi(sqrt(r))]`` for r >= 0
    and 1 for r < 0 (the extension matching :func:`rs_cdf`).  Accurate in
    the far upper tail, where the direct ``1 - rs_cdf(r)`` would lose all
    precision.
    """
    r = _require_finite(r, "r")
    if r <= 0.0:
        return 1.0
    s = math.sqrt(r)
    return min(1.0, 2.0 * (normal_sf(s) + s * normal_pdf(s)))


def rs_cdf(r: float) -> float:
    """Psi(r) for r >= 0; 0 for r < 0 (extended CDF)."""
    r = _require_finite(r, "r")
    if r <= 0.0:
        return 0.0
    return 1.0 - rs_survival(r)


def rs_density(r: float) -> float:
    """dPsi/dr = sqrt(r) * exp(-r/2) / sqrt(2*pi), defined on r >= 0.

    Peaks at r = 1 with value phi(1) ~= 0.2420, so the CDF is Lipschitz
    with constant <= 1/4.
    """
    r = _require_finite(r, "r")
    if r < 0.0:
        raise ValueError(f"rs_density requires r >= 0, got {r}")
    return math.sqrt(r) * math.exp(-0.5 * r) * _INV_SQRT_2PI


@lru_cache(maxsize=256)
def rs_quantile(p: float, tol: float = 1e-12) -> float:
    """Inverse CDF: the r >= 0 with Psi(r) = p, for 0 <= p < 1.

    Bracketed bisection: the upper bracket doubles from 1 until Psi
    exceeds p, then bisects to ``tol`` absolute width.  Psi is monotone
    and cheap, and bisection stays robust as p -> 1 where Newton steps
    would overshoot.  Cached: monitors query the same level repeatedly.
    """
    p = _require_finite(p, "p")
    if p < 0.0 or p >= 1.0:
        raise ValueError(f"rs_quantile requires 0 <= p < 1, got {p}")
    if p == 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while rs_cdf(hi) < p:
        lo = hi
        hi *= 2.0
        if hi > 1e8:  # survival(1e8) underflows long before this
            raise ValueError(f"rs_quantile bracket failed for p={p}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rs_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
