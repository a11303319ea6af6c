"""Stratified cross-validation, grid search, and evaluation reports."""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..features import Dataset
from .metrics import compute_metrics
from .models import ClassifierSpec, fit_or_constant, grid_points

METRICS = ("precision", "recall", "f_measure", "auc")


def stratified_folds(y, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Split row indices into ``k`` folds with per-class counts within one row."""
    y = np.asarray(y)
    order = []
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        order.append(rng.permutation(members))
    stacked = np.concatenate(order)
    fold_of = np.arange(len(stacked)) % k
    return [np.sort(stacked[fold_of == f]) for f in range(k)]


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def cross_validate(spec: ClassifierSpec, X, y, folds: int, seed: int) -> list[dict]:
    """One round of stratified k-fold CV; returns per-fold metric dicts."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    rng = np.random.default_rng(seed)
    out = []
    for f, test in enumerate(stratified_folds(y, folds, rng)):
        if len(test) == 0:
            continue
        train = np.setdiff1d(np.arange(len(y)), test, assume_unique=True)
        model = fit_or_constant(spec.with_seed(_derived_seed(spec.seed, seed, f)), X[train], y[train])
        scores = model.predict_proba(X[test])
        m = compute_metrics(y[test], (scores > 0.5).astype(int), scores)
        out.append({"fold": f, "n_test": int(len(test)), **m.as_dict(), "zero_division": m.zero_division})
    return out


def _fold_count(n: int, folds: int) -> int:
    if n < folds:
        warnings.warn(f"only {n} rows: using {n} folds instead of {folds}", UserWarning, stacklevel=3)
        return n
    return folds


def grid_search(
    algorithm: str,
    grid: Mapping[str, Sequence] | None,
    X,
    y,
    seed: int,
    folds: int = 10,
) -> ClassifierSpec:
    """Exhaustive search scored by mean F-measure over stratified k-fold CV.

    Every grid point sees the same folds; the first best point in declaration
    order wins.
    """
    points = grid_points(algorithm, grid)
    if not points:
        points = [{}]
    y = np.asarray(y).astype(int)
    k = _fold_count(len(y), folds)
    best, best_score = None, -np.inf
    for hp in points:
        spec = ClassifierSpec(algorithm, hp, seed)
        score = float(np.mean([r["f_measure"] for r in cross_validate(spec, X, y, k, seed)]))
        if score > best_score:
            best, best_score = spec, score
    return best


def _summary(values: Sequence[float]) -> dict:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {
        "mean": float(v.mean()),
        "std": float(v.std()),
        "min": float(v.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(v.max()),
    }


@dataclass
class EvalReport:
    class_name: str
    scenario: str
    spec: ClassifierSpec
    folds: list[dict] = field(default_factory=list)
    active_features: tuple[str, ...] = ()
    # held-out scores, kept for leave-one-out runs only
    predictions: np.ndarray | None = None

    @property
    def medians(self) -> dict[str, float]:
        return {m: float(np.median([f[m] for f in self.folds])) for m in METRICS}

    @property
    def summary(self) -> dict[str, dict]:
        return {m: _summary([f[m] for f in self.folds]) for m in METRICS}

    @property
    def zero_division(self) -> int:
        return int(sum(f.get("zero_division", 0) for f in self.folds))

    def to_dict(self) -> dict:
        return {
            "class": self.class_name,
            "scenario": self.scenario,
            "spec": self.spec.as_dict(),
            "active_features": list(self.active_features),
            "medians": self.medians,
            "summary": self.summary,
            "zero_division": self.zero_division,
            "folds": self.folds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


CSV_COLUMNS = ("class", "scenario", "algorithm", "repetition", "fold", "n_test", *METRICS)


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    """Per-fold raw metrics of several reports, one row per fold."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        for f in r.folds:
            w.writerow([r.class_name, r.scenario, r.spec.algorithm, f["repetition"], f["fold"],
                        f["n_test"], *(repr(float(f[m])) for m in METRICS)])
    return buf.getvalue()


def _xy(dataset: Dataset, class_name: str):
    y = dataset.target(class_name)
    if len(y) == 0 or len(np.unique(y)) < 2:
        raise ValueError(f"class {class_name!r} is absent or constant in {dataset.scope}")
    return dataset.matrix(), y


def evaluate_cross_project(
    dataset: Dataset,
    class_name: str,
    spec: ClassifierSpec,
    seed: int,
    repetitions: int = 10,
    folds: int = 10,
) -> EvalReport:
    """Repeated stratified k-fold CV (10 x 10 by default) with derived seeds."""
    X, y = _xy(dataset, class_name)
    k = _fold_count(len(y), folds)
    rep_seeds = np.random.SeedSequence(seed).generate_state(repetitions)
    rows = []
    for rep, s in enumerate(rep_seeds):
        for r in cross_validate(spec, X, y, k, int(s)):
            rows.append({"repetition": rep, **r})
    return EvalReport(class_name, "cross", spec, rows, dataset.active_features)


def evaluate_within_project(dataset: Dataset, class_name: str, spec: ClassifierSpec) -> EvalReport:
    """Leave-one-out CV; metrics are computed once on the pooled predictions."""
    X, y = _xy(dataset, class_name)
    n = len(y)
    if n < 2:
        raise ValueError("leave-one-out needs at least two rows")
    scores = np.empty(n)
    for i in range(n):
        train = np.r_[0:i, i + 1:n]
        model = fit_or_constant(spec.with_seed(_derived_seed(spec.seed, i)), X[train], y[train])
        scores[i] = model.predict_proba(X[i:i + 1])[0]
    m = compute_metrics(y, (scores > 0.5).astype(int), scores)
    row = {"repetition": 0, "fold": -1, "n_test": n, **m.as_dict(), "zero_division": m.zero_division}
    projects = dataset.projects
    scenario = f"within:{projects[0]}" if len(projects) == 1 else "within"
    return EvalReport(class_name, scenario, spec, [row], dataset.active_features, scores)
