"""Independent oracles the tests check the library against.

Everything here is deliberately written without reference to the library
internals: scipy special functions, two-pass batch formulas, brute-force
scans, and closed-form least squares.
"""

import numpy as np
from scipy.stats import chi2, norm

_CHI2_3 = chi2(3)


def chi2_3_cdf(r):
    return _CHI2_3.cdf(r)


def chi2_3_ppf(p):
    return _CHI2_3.ppf(p)


def normal_ppf(p):
    return norm.ppf(p)


def two_pass_mean_var(xs):
    """Batch mean and population variance, the textbook two-pass way."""
    xs = np.asarray(xs, dtype=float)
    mu = xs.sum() / xs.size
    return mu, float(np.sum((xs - mu) ** 2) / xs.size)


def brute_knn_mean(train_z, train_t, z, k):
    """Average target of the k nearest training points, by full sort."""
    train_z = np.atleast_2d(np.asarray(train_z, dtype=float))
    if train_z.shape[0] == 1 and np.ndim(train_z) == 2 and len(train_t) > 1:
        train_z = train_z.T
    z = np.atleast_1d(np.asarray(z, dtype=float))
    d2 = np.sum((train_z - z) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")
    return float(np.mean(np.asarray(train_t, dtype=float)[order[:k]]))


def ols_fit_predict(train_z, train_t, z):
    """Closed-form simple least squares (intercept + slope), 1-D z."""
    slope, intercept = np.polyfit(np.asarray(train_z, float), np.asarray(train_t, float), 1)
    return intercept + slope * z
