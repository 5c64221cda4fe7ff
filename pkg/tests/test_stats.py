import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from sepnets.stats import (
    Method,
    TestResult,
    bonferroni,
    bucket_label,
    median,
    pearson_matrix,
    quartile_boundaries,
    quartile_buckets,
    rank_sum,
    results_to_csv,
    signed_rank,
)

from oracles import rank_sum_p, signed_rank_p


class TestSignedRank:
    def test_small_example_against_enumeration(self):
        r = signed_rank([1, 2, 3, 4, 5], [2, 3, 4, 5, 7])
        assert r.statistic == 0
        assert r.p_value == pytest.approx(0.0625, abs=1e-15)
        assert r.method is Method.EXACT
        assert r.n_effective == 5

    def test_identical_samples(self):
        r = signed_rank([3, 1, 4], [3, 1, 4])
        assert r.p_value == 1.0
        assert r.n_effective == 0
        assert r.method is Method.EXACT
        assert r.warning

    def test_zero_differences_dropped(self):
        with_zeros = signed_rank([1, 5, 9, 3], [1, 2, 9, 1])
        without = signed_rank([5, 3], [2, 1])
        assert with_zeros.n_effective == 2
        assert with_zeros.p_value == without.p_value

    def test_ties_in_absolute_differences(self):
        x, y = [1, 2, 3, 4, 5, 6], [2, 1, 5, 2, 5, 9]
        assert signed_rank(x, y).p_value == pytest.approx(signed_rank_p(x, y), abs=1e-12)

    def test_switches_to_normal_above_25(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=30)
        r = signed_rank(x, np.zeros(30))
        assert r.method is Method.NORMAL and not r.exact
        # scipy's approximation with the same corrections
        ref = sps.wilcoxon(x, np.zeros(30), method="approx", correction=True, zero_method="wilcox")
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_exact_matches_scipy_without_ties(self):
        x = [0.5, -1.25, 2.0, 3.5, -0.75, 4.0, 1.5]
        ref = sps.wilcoxon(x, method="exact")
        assert signed_rank(x, [0] * 7).p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_exact_at_25(self):
        rng = np.random.default_rng(0)
        x = rng.permutation(np.arange(1, 26)) * rng.choice([-1, 1], 25)
        r = signed_rank(x, np.zeros(25))
        assert r.method is Method.EXACT
        assert 0.0 <= r.p_value <= 1.0

    def test_reported_p_decides(self):
        assert TestResult.reported(1.548e-08).reject
        assert not TestResult.reported(8.759e-01).reject

    @pytest.mark.parametrize("bad", [[], [1, 2, 3]])
    def test_bad_lengths(self, bad):
        with pytest.raises(ValueError):
            signed_rank([1, 2], bad)

    def test_bad_alpha(self):
        with pytest.raises(ValueError):
            signed_rank([1], [2], alpha=1.5)


class TestRankSum:
    def test_two_by_two(self):
        r = rank_sum([1, 2], [3, 4])
        assert r.statistic == 0
        assert r.p_value == pytest.approx(2 / 6, abs=1e-15)
        assert r.exact

    def test_single_tied_pair(self):
        assert rank_sum([5], [5]).p_value == 1.0

    def test_separated_samples_reject(self):
        x, y = list(range(1, 11)), list(range(11, 21))
        r = rank_sum(x, y)
        assert r.reject
        # exact value by direct counting: only the two extreme labellings
        assert 2 / math.comb(20, 10) < 0.05
        exact = rank_sum(x, y, method="exact")
        assert exact.p_value == pytest.approx(2 / math.comb(20, 10), rel=1e-12)

    def test_approx_matches_scipy(self):
        rng = np.random.default_rng(5)
        x, y = rng.integers(0, 10, 40), rng.integers(2, 12, 35)
        ref = sps.mannwhitneyu(x, y, method="asymptotic", use_continuity=True)
        r = rank_sum(x, y)
        assert r.statistic == pytest.approx(ref.statistic)
        assert r.p_value == pytest.approx(ref.pvalue, rel=1e-9)

    def test_exact_matches_scipy_without_ties(self):
        x, y = [1.5, 3.2, 7.7, 0.1], [2.2, 5.5, 9.1, 8.8, 6.6]
        ref = sps.mannwhitneyu(x, y, method="exact")
        assert rank_sum(x, y).p_value == pytest.approx(ref.pvalue, abs=1e-12)

    def test_all_tied_large(self):
        r = rank_sum([3] * 10, [3] * 10)
        assert r.p_value == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            rank_sum([], [1])

    def test_tied_exact_against_enumeration(self):
        x, y = [1, 1, 2, 3], [1, 2, 2, 4, 4]
        assert rank_sum(x, y).p_value == pytest.approx(rank_sum_p(x, y), abs=1e-12)


class TestPearson:
    def test_self_and_negation(self):
        x = [1.0, 4.0, 2.0, 8.0]
        m = pearson_matrix({"x": x, "neg": [-v for v in x]})
        assert m["x", "x"] == 1.0
        assert m["x", "neg"] == pytest.approx(-1.0, abs=1e-12)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(2)
        cols = {c: rng.normal(size=20) for c in "abcd"}
        m = pearson_matrix(cols)
        assert np.allclose(m.values, m.values.T)
        assert np.all(np.abs(m.values) <= 1.0)
        assert np.allclose(m.values, np.corrcoef([cols[c] for c in "abcd"]))

    def test_constant_column_flagged(self):
        m = pearson_matrix({"a": [1, 2, 3], "k": [7, 7, 7]})
        assert m.undefined[0, 1] and m.undefined[1, 0]
        assert math.isnan(m["a", "k"])
        assert "NA" in m.to_csv()

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pearson_matrix({"a": [1, 2, 3], "b": [1, 2]})


class TestQuartiles:
    def test_eight_values(self):
        q = quartile_buckets([1, 2, 3, 4, 5, 6, 7, 8])
        assert q.boundaries == (2.5, 4.5, 6.5)
        assert bucket_label(5, q.boundaries) == "Q3"
        assert q.labels == ("Q1", "Q1", "Q2", "Q2", "Q3", "Q3", "Q4", "Q4")

    def test_degenerate(self):
        q = quartile_buckets([7, 7, 7])
        assert q.boundaries == (7.0, 7.0, 7.0)
        assert set(q.labels) == {"Q1"}

    def test_two_points_linear(self):
        b = quartile_boundaries([0, 100], method="linear")
        assert b == (25.0, 50.0, 75.0)
        assert bucket_label(0, b) == "Q1" and bucket_label(100, b) == "Q4"

    def test_two_points_tukey(self):
        assert quartile_boundaries([0, 100]) == (0.0, 50.0, 100.0)

    def test_odd_length_tukey(self):
        # halves [1,2,3,4] and [4,5,6,7] share the median
        assert quartile_boundaries([1, 2, 3, 4, 5, 6, 7]) == (2.5, 4.0, 5.5)

    def test_boundary_goes_low(self):
        assert bucket_label(4.5, (2.5, 4.5, 6.5)) == "Q2"

    def test_empty(self):
        with pytest.raises(ValueError):
            quartile_boundaries([])


class TestMisc:
    @pytest.mark.parametrize("vals,expected", [([5], 5), ([1, 3], 2), ([-50, 0, 50, 50], 25), ([0, 10, 20, 30], 15)])
    def test_median(self, vals, expected):
        assert median(vals) == expected

    def test_bonferroni(self):
        assert bonferroni(0.05, 10) == pytest.approx(0.005)
        assert bonferroni(0.05, 0) == 0.05

    def test_results_csv(self):
        text = results_to_csv([("Deli-Air", TestResult.reported(1.548e-08))])
        assert text == "label,statistic,p_value,rejected\nDeli-Air,,1.5480E-08,True\n"


# -- properties -----------------------------------------------------------------------

small_ints = st.lists(st.integers(-6, 6), min_size=1, max_size=10)


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_signed_rank_matches_enumeration(data):
    x = data.draw(small_ints)
    y = data.draw(st.lists(st.integers(-6, 6), min_size=len(x), max_size=len(x)))
    assert abs(signed_rank(x, y).p_value - signed_rank_p(x, y)) <= 1e-12


@given(st.data())
@settings(max_examples=150, deadline=None)
def test_signed_rank_symmetric(data):
    x = data.draw(small_ints)
    y = data.draw(st.lists(st.integers(-6, 6), min_size=len(x), max_size=len(x)))
    assert signed_rank(x, y).p_value == pytest.approx(signed_rank(y, x).p_value, abs=1e-12)


@given(st.lists(st.integers(0, 8), min_size=1, max_size=6), st.lists(st.integers(0, 8), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_rank_sum_matches_enumeration(x, y):
    assert abs(rank_sum(x, y).p_value - rank_sum_p(x, y)) <= 1e-12


@given(st.lists(st.integers(0, 20), min_size=1, max_size=15), st.lists(st.integers(0, 20), min_size=1, max_size=15))
@settings(max_examples=100, deadline=None)
def test_rank_sum_p_in_unit_interval_and_symmetric(x, y):
    a, b = rank_sum(x, y), rank_sum(y, x)
    assert 0.0 <= a.p_value <= 1.0
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)
    assert a.statistic + b.statistic == pytest.approx(len(x) * len(y))


def _differences_with_w_plus(n, w):
    """Distinct magnitudes 1..n signed so that W+ equals ``w``."""
    signs = {}
    for r in range(n, 0, -1):
        signs[r] = 1 if w >= r else -1
        if w >= r:
            w -= r
    return [signs[r] * r for r in range(1, n + 1)]


# Without ties both p-values depend only on (n, W+), so every W+ is checked.
# At n = 15 and 16 the continuity-corrected normal curve misses the exact
# tail by up to 0.0111 and 0.0104; the bound only holds from n = 17 on.
@pytest.mark.parametrize(
    "n",
    [
        pytest.param(n, marks=pytest.mark.xfail(strict=True, reason="normal error exceeds 0.01 at this n"))
        if n < 17
        else n
        for n in range(15, 26)
    ],
)
def test_normal_close_to_exact_mid_n(n):
    worst = 0.0
    for w in range(n * (n + 1) // 2 + 1):
        d = _differences_with_w_plus(n, w)
        exact = signed_rank(d, [0] * n, method="exact")
        approx = signed_rank(d, [0] * n, method="approx")
        assert exact.statistic == approx.statistic == w
        worst = max(worst, abs(exact.p_value - approx.p_value))
    assert worst <= 0.01


@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=20),
    st.floats(0.1, 10),
    st.floats(-50, 50),
    st.booleans(),
)
@settings(max_examples=100, deadline=None)
def test_pearson_affine_invariance(x, a, b, negate):
    x = np.asarray(x)
    rng = np.random.default_rng(len(x))
    y = rng.normal(size=len(x))
    if np.ptp(x) < 1e-3:
        return
    scale = -a if negate else a
    base = pearson_matrix({"x": x, "y": y})["x", "y"]
    moved = pearson_matrix({"x": scale * x + b, "y": y})["x", "y"]
    assert moved == pytest.approx(-base if negate else base, abs=1e-12)


@given(st.sets(st.integers(-1000, 1000), min_size=4, max_size=80))
@settings(max_examples=100, deadline=None)
def test_bucket_counts_balanced(values):
    values = sorted(values)
    values = values[: len(values) - len(values) % 4]
    labels = quartile_buckets(values).labels
    counts = [labels.count(q) for q in ("Q1", "Q2", "Q3", "Q4")]
    assert max(counts) - min(counts) <= 1
