"""Nonparametric comparison of optimiser results."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

EXACT_MAX_N = 25


class UndefinedTestError(ValueError):
    """All paired differences are zero."""


class WilcoxonResult(NamedTuple):
    statistic: float
    pvalue: float
    n: int
    method: str


def _exact_lower_tail(ranks: np.ndarray, t: float) -> float:
    """P(W+ <= t) under the null, counting all 2**n sign patterns.

    Ranks may be half-integers (ties), so sums are tracked on a doubled
    integer grid.
    """
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    limit = int(math.floor(2 * t + 1e-9))
    hits = sum(counts[: limit + 1])
    return float(hits) / float(2 ** len(ranks))


def wilcoxon_signed_rank(a, b, method: str = "auto") -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped and tied magnitudes share average ranks.
    The statistic is ``min(W+, W-)``.  ``method="auto"`` uses the exact null
    distribution for up to 25 nonzero pairs and the normal approximation
    with continuity and tie correction beyond.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-D and of equal length")
    if a.size < 5:
        raise ValueError("need at least 5 pairs")
    d = a - b
    d = d[d != 0]
    n = d.size
    if n == 0:
        raise UndefinedTestError("all paired differences are zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    t = min(w_plus, w_minus)
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "approx"
    if method == "exact":
        p = min(1.0, 2.0 * _exact_lower_tail(ranks, t))
    elif method == "approx":
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts ** 3 - tie_counts).sum()) / 48.0
        if var <= 0:
            p = 1.0
        else:
            z = max(abs(t - mean) - 0.5, 0.0) / math.sqrt(var)
            p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(t, p, n, method)


def friedman_ranks(matrix) -> np.ndarray:
    """Mean rank of each column (algorithm) over rows (runs); 1 is best."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError("need a runs x algorithms matrix with at least 2 of each")
    return rankdata(m, axis=1).mean(axis=0)
