"""Single-pass accumulators for the running mean and running variance.

One Welford-style accumulator per scalar stream.  Variance is population
normalized (divide by the count k, not k - 1): that is the normalization
the anytime p-value and confidence-sequence formulas are stated with, and
the downstream boundary arithmetic is exact about it.

Accumulators are value-like: single-writer, cheap to copy, and mergeable,
so replicated streams can be reduced in parallel.
"""

from __future__ import annotations

import math

__all__ = ["MomentAccumulator"]


class MomentAccumulator:
    """Running count / mean / centered second moment of a scalar stream."""

    __slots__ = ("count", "_mean", "_m2")

    def __init__(self) -> None:
        self.count = 0
        self._mean = 0.0
        self._m2 = 0.0

    @classmethod
    def from_moments(cls, count: int, mean: float, variance: float) -> "MomentAccumulator":
        """Accumulator in the state it would reach after ``count``
        observations with the given mean and population variance."""
        if count < 0:
            raise ValueError(f"count must be >= 0, got {count}")
        if count > 0 and variance < 0:
            raise ValueError(f"variance must be >= 0, got {variance}")
        out = cls()
        if count > 0:
            out.count = count
            out._mean = float(mean)
            out._m2 = float(variance) * count
        return out

    def __repr__(self) -> str:
        return f"MomentAccumulator(count={self.count}, mean={self._mean!r}, m2={self._m2!r})"

    def update(self, x: float) -> "MomentAccumulator":
        """Consume one observation.  Non-finite input is rejected and the
        state is left untouched."""
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"observation must be finite, got {x!r}")
        self.count += 1
        delta = x - self._mean
        self._mean += delta / self.count
        self._m2 += delta * (x - self._mean)
        return self

    def extend(self, xs) -> "MomentAccumulator":
        for x in xs:
            self.update(x)
        return self

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("mean of an empty accumulator")
        return self._mean

    @property
    def m2(self) -> float:
        """Sum of squared deviations from the current mean (>= 0)."""
        return self._m2

    @property
    def variance(self) -> float:
        """Population variance m2 / count; tiny negative rounding clamps to 0."""
        if self.count == 0:
            raise ValueError("variance of an empty accumulator")
        return max(0.0, self._m2 / self.count)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Accumulator of the concatenated streams (Chan's pairwise update)."""
        out = MomentAccumulator()
        n = self.count + other.count
        if n == 0:
            return out
        delta = other._mean - self._mean
        out.count = n
        out._mean = self._mean + delta * (other.count / n)
        out._m2 = self._m2 + other._m2 + delta * delta * (self.count * other.count / n)
        return out

    def copy(self) -> "MomentAccumulator":
        out = MomentAccumulator()
        out.count = self.count
        out._mean = self._mean
        out._m2 = self._m2
        return out
