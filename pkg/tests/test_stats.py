import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import mannwhitneyu

from commsmell.features import FEATURE_NAMES, dataset_from_arrays
from commsmell.stats import (
    DELTA_THRESHOLDS,
    cliffs_delta,
    compare_populations,
    delta_magnitude,
    equal_frequency_bins,
    information_gain,
    normality_correction,
    overall_ranking,
    rank_features,
    ranking_csv,
    sk_esd,
    wilcoxon_ranksum,
)

from oracles import enumerated_ranksum_p, pairwise_delta


# -- Cliff's delta ----------------------------------------------------------------

def test_delta_thresholds_verbatim():
    assert DELTA_THRESHOLDS == (0.147, 0.33, 0.474)
    assert [delta_magnitude(d) for d in (0.1469, 0.147, 0.3299, 0.33, 0.4739, 0.474, -0.40)] == [
        "negligible", "small", "small", "medium", "medium", "large", "medium"]


def test_delta_examples():
    assert cliffs_delta([1, 2, 3], [1, 2, 3]) == (0.0, "negligible")
    assert cliffs_delta([1, 2], [1, 3]) == (-0.25, "small")


def test_delta_matches_pairwise_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.integers(0, 8, size=rng.integers(1, 30))
        y = rng.integers(0, 8, size=rng.integers(1, 30))
        assert cliffs_delta(x, y)[0] == float(pairwise_delta(x.tolist(), y.tolist()))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=20), st.lists(st.integers(-5, 5), min_size=1, max_size=20))
def test_delta_properties(x, y):
    d = cliffs_delta(x, y)[0]
    assert d == -cliffs_delta(y, x)[0]
    assert -1 <= d <= 1
    assert (d == 1) == (min(x) > max(y))


# -- Wilcoxon -----------------------------------------------------------------------

def test_wilcoxon_examples():
    assert wilcoxon_ranksum([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]) > 0.9
    assert wilcoxon_ranksum(range(1, 9), range(101, 109)) < 0.001
    with pytest.raises(ValueError):
        wilcoxon_ranksum([], [1])


def test_wilcoxon_exact_matches_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        x = rng.integers(0, 6, size=n).tolist()
        y = rng.integers(0, 6, size=m).tolist()
        assert abs(wilcoxon_ranksum(x, y) - enumerated_ranksum_p(x, y)) < 1e-6


def test_wilcoxon_normal_approximation_matches_reference():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.integers(0, 10, size=int(rng.integers(9, 40)))
        y = rng.integers(0, 10, size=int(rng.integers(9, 40)))
        ref = mannwhitneyu(x, y, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
        assert wilcoxon_ranksum(x, y) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=12), st.lists(st.integers(-50, 50), min_size=1, max_size=12))
def test_wilcoxon_monotone_invariance(x, y):
    # integer grid keeps the transform strictly monotone in floating point too
    f = lambda v: np.exp(np.asarray(v) / 5) * 3 + 1
    p = wilcoxon_ranksum(x, y)
    assert 0 <= p <= 1
    assert wilcoxon_ranksum(f(x), f(y)) == pytest.approx(p, abs=1e-12)


# -- information gain --------------------------------------------------------------

def test_gain_of_label_copy_is_one_bit():
    y = np.r_[np.zeros(50, int), np.ones(50, int)]
    assert abs(information_gain(y.astype(float), y) - 1.0) < 1e-9


def test_gain_of_independent_feature_small():
    rng = np.random.default_rng(3)
    assert information_gain(rng.normal(size=10_000), rng.integers(0, 2, size=10_000)) < 0.05


def test_gain_hand_computed_joint():
    # joint counts: x=0: (y0=3, y1=1), x=1: (y0=1, y1=3)
    x = [0, 0, 0, 0, 1, 1, 1, 1]
    y = [0, 0, 0, 1, 0, 1, 1, 1]
    h_y = 1.0
    h_cond = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert information_gain(x, y) == pytest.approx(h_y - h_cond, abs=1e-9)


def test_gain_constant_labels_zero():
    assert information_gain([1, 2, 3], [1, 1, 1]) == 0.0


def test_equal_frequency_bins():
    assert np.bincount(equal_frequency_bins(np.arange(100.0))).tolist() == [10] * 10
    assert equal_frequency_bins([3.0, 1.0, 3.0, 2.0]).tolist() == [2, 0, 2, 1]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 1)), min_size=2, max_size=60))
def test_gain_nonnegative_and_relabel_invariant(data):
    x = np.array([a for a, _ in data], dtype=float)
    y = np.array([b for _, b in data])
    g = information_gain(x, y)
    assert g >= 0
    bins = equal_frequency_bins(x)
    perm = np.random.default_rng(len(data)).permutation(bins.max() + 1)
    # relabeling bins bijectively (as distinct categorical values) keeps the gain
    relabeled = perm[bins].astype(float)
    if len(np.unique(bins)) <= 10:
        assert information_gain(relabeled, y) == pytest.approx(information_gain(bins.astype(float), y), abs=1e-12)


# -- SK-ESD ------------------------------------------------------------------------

def test_three_separated_clusters():
    rng = np.random.default_rng(4)
    groups = {name: rng.normal(mu, 0.5, size=30) for name, mu in (("low", 0), ("mid", 5), ("high", 10))}
    assert sk_esd(groups) == {"high": 1, "mid": 2, "low": 3}


def test_first_split_is_best_two_way_partition():
    means = np.array([10.0, 9.0, 5.2, 5.0, 0.3, 0.0])
    grand = means.mean()
    b0 = lambda idx: sum(len(p) * (means[p].mean() - grand) ** 2 for p in idx if len(p))
    exhaustive = max(
        (b0([list(s), [i for i in range(6) if i not in s]]), s)
        for r in range(1, 6) for s in itertools.combinations(range(6), r)
    )
    contiguous = max((b0([list(range(c)), list(range(c, 6))]), c) for c in range(1, 6))
    assert exhaustive[0] == pytest.approx(contiguous[0])


def test_identical_groups_single_rank():
    sample = [1.0, 2.0, 3.0, 4.0]
    assert set(sk_esd({"a": sample, "b": sample, "c": sample}).values()) == {1}


def test_negligible_difference_same_rank():
    rng = np.random.default_rng(5)
    base = rng.normal(0, 1, size=10)
    a, b = base, base + 0.01
    assert abs(float(pairwise_delta(a.tolist(), b.tolist()))) < 0.147
    ranks = sk_esd({"a": a, "b": b})
    assert ranks["a"] == ranks["b"]


def test_sk_esd_needs_two_samples():
    with pytest.raises(ValueError, match="tiny"):
        sk_esd({"ok": [1, 2], "tiny": [1]})


def test_normality_correction_only_when_skewed():
    flat = {"a": [1.0, 2.0, 3.0], "b": [2.0, 3.0, 4.0]}
    assert np.array_equal(normality_correction(flat)["a"], [1.0, 2.0, 3.0])
    skewed = {"a": [0.0, 0.0, 0.1, 0.2], "b": [0.0, 0.1, 50.0, 100.0]}
    out = normality_correction(skewed)
    assert np.allclose(out["b"], np.log(np.array(skewed["b"]) + 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 7))
def test_sk_esd_rank_properties(seed, k):
    rng = np.random.default_rng(seed)
    groups = {f"g{i}": rng.normal(rng.uniform(0, 3), 1, size=int(rng.integers(2, 15))) for i in range(k)}
    ranks = sk_esd(groups)
    values = sorted(set(ranks.values()))
    assert values == list(range(1, len(values) + 1))
    data = normality_correction(groups)
    # every group of rank r has a mean at least as high as any group of rank r + 1
    for r in values[:-1]:
        assert min(data[g].mean() for g in groups if ranks[g] == r) >= max(
            data[g].mean() for g in groups if ranks[g] == r + 1)
    # neighboring ranks are separated by a non-negligible effect
    for r in values[:-1]:
        hi = np.concatenate([data[g] for g in groups if ranks[g] == r])
        lo = np.concatenate([data[g] for g in groups if ranks[g] == r + 1])
        assert cliffs_delta(hi, lo)[1] != "negligible"


# -- rankings and population comparison ---------------------------------------------

def _planted(n=200, seed=6):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.2, 0.8, size=(2 * n, len(FEATURE_NAMES)))
    x[:, -3:] = rng.integers(1, 20, size=(2 * n, 3))
    y = np.r_[np.ones(n, int), np.zeros(n, int)]
    imp = FEATURE_NAMES.index("IMP")
    x[:, imp] = np.clip(np.where(y == 1, rng.normal(0.09, 0.1, 2 * n), rng.normal(0.26, 0.1, 2 * n)), 0, 1)
    return dataset_from_arrays(x, {"smelly_developer": y, "silo": y})


def test_planted_imp_shift():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cmp = compare_populations(_planted())
    row = cmp["IMP"]
    assert row.p_value < 0.001 and row.delta < 0 and row.magnitude in ("medium", "large")
    assert cmp["POL"].p_value > 0.001


def test_identical_populations():
    rng = np.random.default_rng(7)
    x = rng.uniform(0.1, 1, size=(400, len(FEATURE_NAMES)))
    y = np.r_[np.ones(200, int), np.zeros(200, int)]
    ds = dataset_from_arrays(np.vstack([x[:200], x[:200]]), {"smelly_developer": y})
    row = compare_populations(ds, features=["VAL"])["VAL"]
    assert row.p_value > 0.05 and row.magnitude == "negligible"


def test_all_zero_side_skipped():
    x = np.ones((6, len(FEATURE_NAMES)))
    x[:3, FEATURE_NAMES.index("JOY")] = 0
    ds = dataset_from_arrays(x, {"smelly_developer": [1, 1, 1, 0, 0, 0]})
    with pytest.warns(UserWarning, match="JOY"):
        cmp = compare_populations(ds, features=["JOY", "POL"])
    assert cmp.skipped == ["JOY"] and [r.feature for r in cmp.rows] == ["POL"]
    assert cmp.to_csv().splitlines()[0].startswith("feature,p_value,delta,magnitude")


def test_rank_features_planted():
    ds = _planted(60)
    r = rank_features(ds, "smelly_developer", seed=1, repetitions=3)
    assert r.top_group() == {"IMP"}
    gains = [g for _, g, _ in r.ordered()]
    assert gains == sorted(gains, reverse=True)
    overall = overall_ranking([r, rank_features(ds, "silo", seed=2, repetitions=3)])
    assert overall.class_name == "mean" and "IMP" in overall.top_group()
    text = ranking_csv([r, overall])
    assert text.splitlines()[0] == "scenario,class,feature,gain,sk_rank"
    assert text.splitlines()[1].startswith("cross,smelly_developer,IMP,")
