"""Two-sample distances, permutation p-values, and moment summaries used by
the Monte Carlo convergence reports."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from .errors import ParameterError

__all__ = [
    "energy_distance",
    "energy_permutation_pvalue",
    "ks_against_normal",
    "ks_two_sample",
    "moment_summary",
    "trend_ok",
]


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ParameterError("samples must be 1-D scalars or 2-D (n, dim) vectors")
    return x


def _energy_from_blocks(d_xy, d_xx, d_yy) -> float:
    n, m = d_xy.shape
    return float(
        2.0 * d_xy.mean() - d_xx.sum() / (n * n) - d_yy.sum() / (m * m)
    )


def energy_distance(x, y) -> float:
    """Squared two-sample energy statistic 2 E|X-Y| - E|X-X'| - E|Y-Y'|.

    Nonnegative, zero iff the distributions agree; works for scalar samples
    and for vectors of finite-dimensional distributions alike.
    """
    x, y = _as_matrix(x), _as_matrix(y)
    return _energy_from_blocks(cdist(x, y), cdist(x, x), cdist(y, y))


def energy_permutation_pvalue(x, y, n_permutations: int = 200, seed: int = 0):
    """Energy statistic with a label-permutation p-value.

    Returns (statistic, p_value).  The p-value is the usual add-one estimate
    of P(permuted statistic >= observed).
    """
    x, y = _as_matrix(x), _as_matrix(y)
    n = len(x)
    pooled = np.vstack([x, y])
    dist = cdist(pooled, pooled)
    idx = np.arange(len(pooled))

    def stat(order):
        a, b = order[:n], order[n:]
        return _energy_from_blocks(
            dist[np.ix_(a, b)], dist[np.ix_(a, a)], dist[np.ix_(b, b)]
        )

    observed = stat(idx)
    rng = np.random.default_rng(seed)
    exceed = 0
    for _ in range(n_permutations):
        perm = rng.permutation(idx)
        if stat(perm) >= observed:
            exceed += 1
    p_value = (1.0 + exceed) / (1.0 + n_permutations)
    return observed, p_value


def ks_against_normal(samples, sigma: float, mu: float = 0.0):
    """One-sample Kolmogorov-Smirnov test against N(mu, sigma^2)."""
    if sigma <= 0.0:
        raise ParameterError("sigma must be positive")
    result = stats.kstest(np.asarray(samples, dtype=float), "norm", args=(mu, sigma))
    return float(result.statistic), float(result.pvalue)


def ks_two_sample(x, y):
    result = stats.ks_2samp(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return float(result.statistic), float(result.pvalue)


def moment_summary(samples) -> dict:
    """Mean/variance/skewness/kurtosis with Monte Carlo standard errors.

    The variance SE uses the fourth-moment formula; skewness and kurtosis use
    the usual large-sample normal approximations.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    centred = x - mean
    m4 = float(np.mean(centred**4))
    return {
        "n": n,
        "mean": mean,
        "se_mean": math.sqrt(var / n),
        "variance": var,
        "se_variance": math.sqrt(max(m4 - var**2, 0.0) / n),
        "skewness": float(stats.skew(x)),
        "se_skewness": math.sqrt(6.0 / n),
        "kurtosis": float(stats.kurtosis(x, fisher=False)),
        "se_kurtosis": math.sqrt(24.0 / n),
    }


def trend_ok(values, allowed_inversions: int = 1) -> bool:
    """True when the sequence decreases with at most the allowed inversions."""
    diffs = np.diff(np.asarray(values, dtype=float))
    return int(np.sum(diffs > 0.0)) <= allowed_inversions
