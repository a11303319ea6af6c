"""Feature ranking (information gain + Scott-Knott ESD) and two-population
comparisons (Wilcoxon rank-sum + Cliff's delta)."""

from __future__ import annotations

import csv
import io
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import chi2, norm, rankdata, skew

from .features import Dataset
from .ingest import DataWarning
from .learn.validation import stratified_folds

NEGLIGIBLE, SMALL, MEDIUM, LARGE = "negligible", "small", "medium", "large"
# |delta| cut-offs between negligible/small, small/medium, medium/large
DELTA_THRESHOLDS = (0.147, 0.33, 0.474)


def _entropy(counts) -> float:
    counts = np.asarray([c for c in counts if c > 0], dtype=float)
    if counts.size == 0:
        return 0.0
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def equal_frequency_bins(values, bins: int = 10) -> np.ndarray:
    """Bin index per value using quantile cut points; tied values share a bin.

    With fewer distinct values than ``bins`` each distinct value is its own bin.
    """
    x = np.asarray(values, dtype=float)
    distinct = np.unique(x)
    if len(distinct) <= bins:
        return np.searchsorted(distinct, x)
    cuts = np.unique(np.quantile(x, np.linspace(0, 1, bins + 1)[1:-1]))
    return np.searchsorted(cuts, x, side="right")


def information_gain(values, labels, bins: int = 10) -> float:
    """Mutual information I(X;Y) in bits between a discretized feature and a
    binary label, clamped at zero."""
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels)
    if x.shape != y.shape:
        raise ValueError("feature and labels differ in length")
    if len(np.unique(y)) < 2:
        return 0.0
    xb = equal_frequency_bins(x, bins)
    h_y = _entropy(Counter(y.tolist()).values())
    n = len(y)
    h_y_given_x = 0.0
    for b in np.unique(xb):
        mask = xb == b
        h_y_given_x += mask.sum() / n * _entropy(Counter(y[mask].tolist()).values())
    return max(0.0, h_y - h_y_given_x)


def cliffs_delta(x, y) -> tuple[float, str]:
    """Cliff's delta and its magnitude label."""
    x = np.asarray(x, dtype=float)
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ValueError("Cliff's delta needs two non-empty samples")
    # for each x_i: #y below minus #y above
    below = np.searchsorted(y, x, side="left")
    above = y.size - np.searchsorted(y, x, side="right")
    delta = float((below.sum() - above.sum()) / (x.size * y.size))
    return delta, delta_magnitude(delta)


def delta_magnitude(delta: float) -> str:
    d = abs(delta)
    if d < DELTA_THRESHOLDS[0]:
        return NEGLIGIBLE
    if d < DELTA_THRESHOLDS[1]:
        return SMALL
    if d < DELTA_THRESHOLDS[2]:
        return MEDIUM
    return LARGE


EXACT_LIMIT = 16


def _exact_ranksum_pvalue(x, y) -> float:
    # doubled midranks are integers, so the null distribution of the rank sum
    # can be counted exactly over all C(n+m, n) assignments
    pooled = np.concatenate([x, y])
    ranks2 = np.rint(2 * rankdata(pooled)).astype(int)
    n = len(x)
    observed = int(ranks2[:n].sum())
    total = int(ranks2.sum())
    # ways[k][s]: number of k-subsets with doubled rank sum s
    ways = [Counter() for _ in range(n + 1)]
    ways[0][0] = 1
    for r in ranks2:
        for k in range(min(n, len(ranks2)) - 1, -1, -1):
            for s, c in ways[k].items():
                ways[k + 1][s + r] += c
    dist = ways[n]
    # 2 * (s - mean) with mean = total * n / (n + m) kept integral
    N = len(pooled)
    obs_dev = abs(N * observed - n * total)
    extreme = sum(c for s, c in dist.items() if abs(N * s - n * total) >= obs_dev)
    return min(1.0, extreme / math.comb(N, n))


def wilcoxon_ranksum(x, y) -> float:
    """Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value.

    Exact permutation distribution when ``len(x) + len(y) <= 16``; otherwise
    the normal approximation with tie and continuity corrections.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("Wilcoxon rank-sum needs two non-empty samples")
    n, m = x.size, y.size
    if n + m <= EXACT_LIMIT:
        return _exact_ranksum_pvalue(x, y)
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    N = n + m
    u = ranks[:n].sum() - n * (n + 1) / 2
    _, ties = np.unique(pooled, return_counts=True)
    var = n * m / 12 * ((N + 1) - (ties**3 - ties).sum() / (N * (N - 1)))
    if var <= 0:
        return 1.0
    z = (abs(u - n * m / 2) - 0.5) / math.sqrt(var)
    if z <= 0:
        return 1.0
    return float(min(1.0, 2 * norm.sf(z)))


# -- Scott-Knott ESD ---------------------------------------------------------

def normality_correction(groups: Mapping[str, Sequence[float]]) -> dict[str, np.ndarray]:
    """Apply ``log(x - min + 1)`` to every group when the pooled sample is
    right-skewed (skewness > 1); otherwise return the samples unchanged."""
    arrays = {k: np.asarray(v, dtype=float) for k, v in groups.items()}
    pooled = np.concatenate(list(arrays.values()))
    if pooled.size < 3 or np.ptp(pooled) == 0 or skew(pooled) <= 1:
        return arrays
    lo = pooled.min()
    return {k: np.log(v - lo + 1) for k, v in arrays.items()}


def _scott_knott(names, means, sizes, mse, df, alpha) -> list[list[int]]:
    """Recursive Scott-Knott on groups already sorted by mean (indices)."""
    k = len(names)
    if k < 2:
        return [list(names)]
    m = np.array([means[i] for i in names])
    grand = m.mean()
    best_b0, best_cut = -1.0, None
    for cut in range(1, k):
        a, b = m[:cut], m[cut:]
        b0 = len(a) * (a.mean() - grand) ** 2 + len(b) * (b.mean() - grand) ** 2
        if b0 > best_b0:
            best_b0, best_cut = b0, cut
    r = np.mean([sizes[i] for i in names])
    var_mean = mse / r
    sigma2 = (((m - grand) ** 2).sum() + df * var_mean) / (k + df)
    if sigma2 <= 0 or best_b0 <= 0:
        return [list(names)]
    lam = math.pi / (2 * (math.pi - 2)) * best_b0 / sigma2
    if lam <= chi2.ppf(1 - alpha, k / (math.pi - 2)):
        return [list(names)]
    return (_scott_knott(names[:best_cut], means, sizes, mse, df, alpha)
            + _scott_knott(names[best_cut:], means, sizes, mse, df, alpha))


def sk_esd(groups: Mapping[str, Sequence[float]], alpha: float = 0.05) -> dict[str, int]:
    """Scott-Knott Effect Size Difference ranking; rank 1 has the highest mean.

    Steps: normality correction, Scott-Knott partitioning of the sorted group
    means (split kept only when the lambda statistic beats the chi-square
    critical value), then merging of adjacent clusters whose pooled samples
    differ by a negligible Cliff's delta.
    """
    for name, sample in groups.items():
        if len(sample) < 2:
            raise ValueError(f"group {name!r} has fewer than 2 samples")
    if not groups:
        return {}
    data = normality_correction(groups)
    names = sorted(data, key=lambda g: (-data[g].mean(), str(g)))
    means = {g: data[g].mean() for g in names}
    sizes = {g: data[g].size for g in names}
    df = sum(sizes.values()) - len(names)
    sse = sum(((data[g] - means[g]) ** 2).sum() for g in names)
    mse = sse / df if df > 0 else 0.0
    clusters = _scott_knott(names, means, sizes, mse, df, alpha)

    merged = True
    while merged and len(clusters) > 1:
        merged = False
        for i in range(len(clusters) - 1):
            left = np.concatenate([data[g] for g in clusters[i]])
            right = np.concatenate([data[g] for g in clusters[i + 1]])
            if cliffs_delta(left, right)[1] == NEGLIGIBLE:
                clusters[i:i + 2] = [clusters[i] + clusters[i + 1]]
                merged = True
                break
    return {g: rank for rank, cluster in enumerate(clusters, 1) for g in cluster}


# -- reports -----------------------------------------------------------------

@dataclass
class GainRanking:
    scenario: str
    class_name: str
    gains: dict[str, float]
    ranks: dict[str, int]
    samples: dict[str, list[float]] = field(default_factory=dict, repr=False)

    def ordered(self) -> list[tuple[str, float, int]]:
        return sorted(
            ((f, self.gains[f], self.ranks[f]) for f in self.gains),
            key=lambda t: (-t[1], t[2], t[0]),
        )

    def top_group(self) -> set[str]:
        return {f for f, r in self.ranks.items() if r == 1}


def gain_samples(dataset: Dataset, class_name: str, seed: int, repetitions: int = 10,
                 folds: int = 10, bins: int = 10) -> dict[str, list[float]]:
    """Information gain of every active feature on each training split of a
    repeated stratified k-fold partition."""
    X = dataset.matrix()
    y = dataset.target(class_name)
    k = min(folds, len(y))
    out: dict[str, list[float]] = {f: [] for f in dataset.active_features}
    for s in np.random.SeedSequence(seed).generate_state(repetitions):
        rng = np.random.default_rng(int(s))
        for test in stratified_folds(y, k, rng):
            train = np.setdiff1d(np.arange(len(y)), test, assume_unique=True)
            for j, f in enumerate(dataset.active_features):
                out[f].append(information_gain(X[train, j], y[train], bins))
    return out


def rank_features(dataset: Dataset, class_name: str, seed: int, scenario: str = "cross",
                  repetitions: int = 10, folds: int = 10, alpha: float = 0.05) -> GainRanking:
    samples = gain_samples(dataset, class_name, seed, repetitions, folds)
    gains = {f: float(np.mean(v)) for f, v in samples.items()}
    return GainRanking(scenario, class_name, gains, sk_esd(samples, alpha), samples)


def overall_ranking(rankings: Sequence[GainRanking], alpha: float = 0.05) -> GainRanking:
    """Average per-class gains arithmetically and rank the pooled samples."""
    if not rankings:
        raise ValueError("no per-class rankings to combine")
    features = list(rankings[0].gains)
    pooled = {f: [v for r in rankings for v in r.samples[f]] for f in features}
    gains = {f: float(np.mean([r.gains[f] for r in rankings])) for f in features}
    return GainRanking(rankings[0].scenario, "mean", gains, sk_esd(pooled, alpha), pooled)


def ranking_csv(rankings: Sequence[GainRanking]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scenario", "class", "feature", "gain", "sk_rank"])
    for r in rankings:
        for f, g, rank in r.ordered():
            w.writerow([r.scenario, r.class_name, f, repr(g), rank])
    return buf.getvalue()


@dataclass(frozen=True)
class FeatureComparison:
    feature: str
    p_value: float
    delta: float
    magnitude: str
    mean_smelly: float
    mean_non_smelly: float
    var_smelly: float
    var_non_smelly: float
    n_smelly: int
    n_non_smelly: int


@dataclass
class PopulationComparison:
    rows: list[FeatureComparison]
    skipped: list[str] = field(default_factory=list)

    def __getitem__(self, feature: str) -> FeatureComparison:
        for r in self.rows:
            if r.feature == feature:
                return r
        raise KeyError(feature)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = list(FeatureComparison.__dataclass_fields__)
        w.writerow(cols)
        for r in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(r, c) for c in cols)])
        return buf.getvalue()


def _var(v: np.ndarray) -> float:
    return float(v.var(ddof=1)) if v.size > 1 else 0.0


def compare_populations(dataset: Dataset, class_name: str = "smelly_developer",
                        features: Sequence[str] | None = None) -> PopulationComparison:
    """Smelly vs non-smelly comparison per feature, zeros removed on each side."""
    features = dataset.active_features if features is None else tuple(features)
    X = dataset.matrix(features)
    y = dataset.target(class_name).astype(bool)
    rows, skipped = [], []
    for j, f in enumerate(features):
        smelly = X[y, j]
        other = X[~y, j]
        smelly, other = smelly[smelly != 0], other[other != 0]
        if smelly.size == 0 or other.size == 0:
            warnings.warn(f"{f}: a group is empty after zero removal, skipped", DataWarning, stacklevel=2)
            skipped.append(f)
            continue
        delta, mag = cliffs_delta(smelly, other)
        rows.append(FeatureComparison(
            feature=f,
            p_value=wilcoxon_ranksum(smelly, other),
            delta=delta,
            magnitude=mag,
            mean_smelly=float(smelly.mean()),
            mean_non_smelly=float(other.mean()),
            var_smelly=_var(smelly),
            var_non_smelly=_var(other),
            n_smelly=int(smelly.size),
            n_non_smelly=int(other.size),
        ))
    return PopulationComparison(rows, skipped)
