"""Distribution families and simulated data-generating processes.

Scalar families carry their mean and variance analytically, since the
Monte Carlo labs standardize partial sums by the true moments.  The
conditional-independence DGPs produce (x, y, z) triplet streams with the
null (x independent of y given z) holding by construction at rho = 0 and
a conditional covariance of exactly rho otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Family", "get_family", "family_names", "cit_stream"]


@dataclass(frozen=True)
class Family:
    """A scalar iid family with known first two moments."""

    name: str
    mean: float
    variance: float
    _sampler: Callable[[np.random.Generator, int], np.ndarray]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self._sampler(rng, size)


def _normal(rng, size):
    return rng.standard_normal(size)


def _exp1(rng, size):
    return rng.standard_exponential(size) - 1.0


def _rademacher(rng, size):
    return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0


def _bernoulli01(rng, size):
    # Bernoulli(0.1), centered and scaled to unit variance.
    return ((rng.random(size) < 0.1).astype(np.float64) - 0.1) / 0.3


def _constant(rng, size):
    return np.ones(size)


_FAMILIES = {
    "normal": Family("normal", 0.0, 1.0, _normal),
    "exp1": Family("exp1", 0.0, 1.0, _exp1),
    "rademacher": Family("rademacher", 0.0, 1.0, _rademacher),
    "bernoulli01": Family("bernoulli01", 0.0, 1.0, _bernoulli01),
    "constant": Family("constant", 1.0, 0.0, _constant),
}


def family_names() -> list[str]:
    return sorted(_FAMILIES)


def get_family(name: str, shift: float = 0.0) -> Family:
    """Look up a family by name, optionally shifted by a constant."""
    try:
        fam = _FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; known: {', '.join(family_names())}"
        ) from None
    if shift == 0.0:
        return fam
    base = fam._sampler
    return Family(
        f"{fam.name}+{shift:g}",
        fam.mean + shift,
        fam.variance,
        lambda rng, size: base(rng, size) + shift,
    )


def cit_stream(
    rng: np.random.Generator, n: int, d: int, rho: float
) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Training and evaluation triplet streams for the CIT experiments.

    With u = (z_1 + ... + z_d) / sqrt(d) ~ N(0, 1):

        x = sin(2u) + e_x,    y = u^2 / 2 + e_y + rho * e_x,

    e_x, e_y iid N(0, 1).  rho = 0 gives conditional independence by
    construction; rho != 0 gives E[(x - E[x|z])(y - E[y|z]) | z] = rho.
    The rho term costs no extra draws, so the rho = 0 stream is bitwise
    identical to the null stream under the same generator state.

    Returns {"train": (z, x, y), "eval": (z, x, y)} with z of shape (n, d).
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    w = 1.0 / math.sqrt(d)
    out = {}
    for part in ("train", "eval"):
        z = rng.standard_normal((n, d))
        ex = rng.standard_normal(n)
        ey = rng.standard_normal(n)
        u = z.sum(axis=1) * w
        x = np.sin(2.0 * u) + ex
        y = 0.5 * u * u + ey + rho * ex
        out[part] = (z, x, y)
    return out
