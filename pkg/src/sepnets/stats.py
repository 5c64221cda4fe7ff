"""Non-parametric statistics used by the structure learner.

Two-sided Wilcoxon signed-rank and Mann-Whitney rank-sum tests with exact
null distributions for small samples, a Pearson correlation matrix that
flags constant columns, quartile bucketing and the median.

Exact distributions are computed by counting over doubled ranks (average
ranks of ties are multiples of 1/2), so ties are handled exactly.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import norm, rankdata

BUCKET_LABELS = ("Q1", "Q2", "Q3", "Q4")

SIGNED_RANK_EXACT_MAX = 25
RANK_SUM_EXACT_MAX = 12


class Method(str, Enum):
    EXACT = "ExactEnumeration"
    NORMAL = "NormalApprox"
    RANK_SUM = "RankSum"
    REPORTED = "Reported"


@dataclass(frozen=True)
class TestResult:
    """Outcome of one two-sided test.

    ``reject`` is ``p_value < alpha``.  For the rank-sum test ``exact`` tells
    whether the p-value came from the exact permutation distribution.
    """

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    method: Method
    n_effective: int
    alpha: float
    exact: bool = True
    warning: str | None = None

    @property
    def reject(self) -> bool:
        return self.p_value < self.alpha

    @classmethod
    def reported(cls, p_value: float, alpha: float = 0.05) -> "TestResult":
        """Wrap a p-value computed elsewhere, e.g. read back from a report."""
        return cls(math.nan, float(p_value), Method.REPORTED, 0, alpha, exact=False)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _count_subset_sums(weights: Sequence[int]) -> np.ndarray:
    """counts[s] = number of subsets of ``weights`` summing to s."""
    total = int(sum(weights))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for w in weights:
        if w:
            counts[w:] = counts[w:] + counts[: total + 1 - w].copy()
        else:
            counts *= 2.0
    return counts


def _two_sided_from_counts(counts: np.ndarray, observed: int, center2: int) -> float:
    """P(|S - c| >= |observed - c|) for S with the given count vector.

    Sums are doubled-rank integers; ``center2`` is twice the centre in the
    same units (so everything stays integral).
    """
    s = np.arange(len(counts))
    dev = np.abs(2 * s - center2)
    mask = dev >= abs(2 * observed - center2)
    return float(min(1.0, counts[mask].sum() / counts.sum()))


def signed_rank(x, y, alpha: float = 0.05, method: str = "auto") -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped before ranking; tied absolute differences
    get average ranks.  ``method`` is ``"auto"`` (exact up to 25 non-zero
    differences, normal approximation beyond), ``"exact"`` or ``"approx"``.
    The statistic is W+, the rank sum of positive differences.
    """
    _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("signed_rank needs two 1-d samples of equal length")
    if len(x) == 0:
        raise ValueError("signed_rank needs at least one pair")
    d = x - y
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return TestResult(0.0, 1.0, Method.EXACT, 0, alpha, True, "all differences are zero")

    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if method == "auto":
        method = "exact" if n <= SIGNED_RANK_EXACT_MAX else "approx"

    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _count_subset_sums(doubled.tolist())
        p = _two_sided_from_counts(counts, int(round(2 * w_plus)), int(doubled.sum()))
        return TestResult(w_plus, p, Method.EXACT, n, alpha, True)
    if method != "approx":
        raise ValueError(f"unknown method {method!r}")

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float((tie_counts**3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return TestResult(w_plus, 1.0, Method.NORMAL, n, alpha, False, "zero variance")
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(var)
    p = float(min(1.0, 2.0 * norm.sf(z)))
    return TestResult(w_plus, p, Method.NORMAL, n, alpha, False)


def rank_sum(x, y, alpha: float = 0.05, method: str = "auto") -> TestResult:
    """Two-sided Mann-Whitney rank-sum test on independent samples.

    The statistic is U for ``x``: the number of (x, y) pairs with x > y,
    ties counting one half.  Exact when ``len(x) + len(y) <= 12`` (or
    ``method="exact"``), tie-corrected normal approximation with continuity
    correction otherwise.
    """
    _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("rank_sum needs two nonempty samples")
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    r1 = float(ranks[:n1].sum())
    u = r1 - n1 * (n1 + 1) / 2.0
    n = n1 + n2
    if method == "auto":
        method = "exact" if n <= RANK_SUM_EXACT_MAX else "approx"

    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        # dp[k][s]: ways to choose k of the pooled items with doubled rank sum s
        total = int(doubled.sum())
        dp = np.zeros((n1 + 1, total + 1), dtype=np.float64)
        dp[0, 0] = 1.0
        for w in doubled.tolist():
            dp[1:, w:] = dp[1:, w:] + dp[:-1, : total + 1 - w].copy()
        counts = dp[n1]
        p = _two_sided_from_counts(counts, int(round(2 * r1)), 2 * n1 * (n + 1))
        return TestResult(u, p, Method.RANK_SUM, n, alpha, True)
    if method != "approx":
        raise ValueError(f"unknown method {method!r}")

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float((tie_counts**3 - tie_counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return TestResult(u, 1.0, Method.RANK_SUM, n, alpha, False, "all values tied")
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    p = float(min(1.0, 2.0 * norm.sf(z)))
    return TestResult(u, p, Method.RANK_SUM, n, alpha, False)


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: np.ndarray
    undefined: np.ndarray  # bool mask, True where a constant column makes r undefined

    def __getitem__(self, pair):
        a, b = pair
        return float(self.values[self.names.index(a), self.names.index(b)])

    def to_csv(self, digits: int = 4) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *self.names])
        for i, name in enumerate(self.names):
            w.writerow([name, *("NA" if self.undefined[i, j] else f"{self.values[i, j]:.{digits}f}"
                                for j in range(len(self.names)))])
        return buf.getvalue()


def pearson_matrix(columns: Mapping[str, Sequence[float]]) -> CorrelationMatrix:
    """Pairwise Pearson correlations of named columns.

    Entries involving a constant column are NaN and flagged in
    ``undefined``.
    """
    names = tuple(columns)
    data = [np.asarray(columns[k], dtype=float) for k in names]
    lengths = {len(c) for c in data}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    if data and len(data[0]) < 2:
        raise ValueError("pearson_matrix needs at least two rows")
    k = len(names)
    values = np.full((k, k), np.nan)
    undefined = np.zeros((k, k), dtype=bool)
    centered = []
    for c in data:
        dc = c - c.mean()
        norm_ = math.sqrt(float(dc @ dc))
        centered.append(dc / norm_ if norm_ > 0 else None)
    for i in range(k):
        for j in range(i, k):
            if centered[i] is None or centered[j] is None:
                undefined[i, j] = undefined[j, i] = True
                continue
            r = 1.0 if i == j else float(np.clip(centered[i] @ centered[j], -1.0, 1.0))
            values[i, j] = values[j, i] = r
    return CorrelationMatrix(names, values, undefined)


@dataclass(frozen=True)
class Quartiles:
    boundaries: tuple[float, float, float]
    labels: tuple[str, ...]


def _median_sorted(s: Sequence[float]) -> float:
    n = len(s)
    mid = n // 2
    return float(s[mid]) if n % 2 else (s[mid - 1] + s[mid]) / 2.0


def quartile_boundaries(values, method: str = "tukey") -> tuple[float, float, float]:
    """(q1, q2, q3) of a nonempty sample.

    ``"tukey"`` uses the median of each half, the middle value belonging to
    both halves when n is odd.  ``"linear"`` is the usual linear
    interpolation between order statistics (numpy's default).
    """
    s = sorted(float(v) for v in values)
    if not s:
        raise ValueError("quartiles of an empty sample")
    if method == "linear":
        q = np.quantile(np.asarray(s), [0.25, 0.5, 0.75])
        return (float(q[0]), float(q[1]), float(q[2]))
    if method != "tukey":
        raise ValueError(f"unknown quartile method {method!r}")
    n = len(s)
    half = (n + 1) // 2
    return (_median_sorted(s[:half]), _median_sorted(s), _median_sorted(s[n - half:]))


def bucket_label(value: float, boundaries: Sequence[float]) -> str:
    """Q1..Q4 for ``value``; a value equal to a boundary goes to the lower bucket."""
    for label, b in zip(BUCKET_LABELS, boundaries):
        if value <= b:
            return label
    return BUCKET_LABELS[3]


def quartile_buckets(values, method: str = "tukey") -> Quartiles:
    bounds = quartile_boundaries(values, method)
    return Quartiles(bounds, tuple(bucket_label(float(v), bounds) for v in values))


def median(values) -> float:
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("median of an empty sample")
    return float(statistics.median(vals))


def bonferroni(alpha: float, n_tests: int) -> float:
    return alpha / max(n_tests, 1)


def results_to_csv(rows: Sequence[tuple[str, TestResult]]) -> str:
    """``label,statistic,p_value,rejected`` rows, one per test."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "statistic", "p_value", "rejected"])
    for label, r in rows:
        stat = "" if math.isnan(r.statistic) else f"{r.statistic:g}"
        w.writerow([label, stat, f"{r.p_value:.4E}", str(r.reject)])
    return buf.getvalue()
