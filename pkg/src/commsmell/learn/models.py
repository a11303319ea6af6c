"""Classifier specs, training, and the default hyper-parameter grids."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .linear import GaussianNaiveBayes, LogisticRegression
from .tree import DecisionTree, RandomForest

ALGORITHMS = ("decision_tree", "random_forest", "logistic_regression", "gaussian_naive_bayes")

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "decision_tree": {"max_depth": [3, 5, 10, None], "min_samples_leaf": [1, 5, 10]},
    "random_forest": {"n_trees": [10, 50, 100]},
    "logistic_regression": {"l2": [0.0, 0.01, 0.1, 1.0]},
    "gaussian_naive_bayes": {},
}

_PARAM_DOMAINS = {
    "decision_tree": {"max_depth", "min_samples_leaf"},
    "random_forest": {"n_trees", "max_depth", "min_samples_leaf"},
    "logistic_regression": {"l2", "max_iter", "tol"},
    "gaussian_naive_bayes": set(),
}


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: str
    hyper_parameters: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        extra = set(self.hyper_parameters) - _PARAM_DOMAINS[self.algorithm]
        if extra:
            raise ValueError(f"{self.algorithm} does not take {sorted(extra)}")
        depth = self.hyper_parameters.get("max_depth")
        if depth is not None and int(depth) < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if float(self.hyper_parameters.get("l2", 0.0)) < 0:
            raise ValueError("l2 must be non-negative")

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.algorithm, dict(self.hyper_parameters), int(seed))

    def as_dict(self) -> dict:
        return {"algorithm": self.algorithm, "hyper_parameters": dict(self.hyper_parameters), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ClassifierSpec":
        return cls(d["algorithm"], dict(d.get("hyper_parameters", {})), int(d.get("seed", 0)))


def grid_points(algorithm: str, grid: Mapping[str, Sequence] | None = None) -> list[dict]:
    """Cartesian product of a grid, in declaration order."""
    grid = DEFAULT_GRIDS[algorithm] if grid is None else grid
    names = list(grid)
    return [dict(zip(names, values)) for values in itertools.product(*(grid[n] for n in names))]


def _make_estimator(spec: ClassifierSpec):
    hp = dict(spec.hyper_parameters)
    if spec.algorithm == "decision_tree":
        return DecisionTree(hp.get("max_depth"), hp.get("min_samples_leaf", 1))
    if spec.algorithm == "random_forest":
        return RandomForest(
            n_trees=hp.get("n_trees", 100),
            max_depth=hp.get("max_depth"),
            min_samples_leaf=hp.get("min_samples_leaf", 1),
            seed=spec.seed,
        )
    if spec.algorithm == "logistic_regression":
        return LogisticRegression(hp.get("l2", 0.0), hp.get("tol", 1e-6), hp.get("max_iter", 10_000))
    return GaussianNaiveBayes()


@dataclass
class Model:
    spec: ClassifierSpec
    estimator: object
    active_features: tuple[str, ...]

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.active_features):
            raise ValueError(
                f"model was trained on {len(self.active_features)} features, got shape {X.shape}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        return self.estimator.predict_proba(self._check(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(int)


class _Constant:
    def __init__(self, value: int):
        self.value = float(value)

    def predict_proba(self, X):
        return np.full(len(X), self.value)


def train_classifier(spec: ClassifierSpec, X, y, feature_names: Sequence[str] | None = None) -> Model:
    """Fit the classifier described by ``spec``; both classes must be present."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.shape[0] < 2:
        raise ValueError("need at least two rows to train")
    if len(np.unique(y)) < 2:
        raise ValueError("training data contains a single class")
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(X.shape[1]))
    return Model(spec, _make_estimator(spec).fit(X, y), names)


def fit_or_constant(spec: ClassifierSpec, X, y, feature_names=None) -> Model:
    """Like :func:`train_classifier`, but a single-class training fold yields a
    constant predictor instead of an error."""
    y = np.asarray(y).astype(int)
    if len(np.unique(y)) < 2:
        names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(np.shape(X)[1]))
        return Model(spec, _Constant(int(y[0])), names)
    return train_classifier(spec, X, y, feature_names)
