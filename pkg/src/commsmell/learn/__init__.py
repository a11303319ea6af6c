from .metrics import Metrics, compute_metrics, roc_auc
from .models import (
    ALGORITHMS,
    DEFAULT_GRIDS,
    ClassifierSpec,
    Model,
    grid_points,
    train_classifier,
)
from .tree import DecisionTree, RandomForest
from .linear import GaussianNaiveBayes, LogisticRegression
from .validation import (
    EvalReport,
    cross_validate,
    evaluate_cross_project,
    evaluate_within_project,
    grid_search,
    reports_to_csv,
    stratified_folds,
)

__all__ = [
    "ALGORITHMS",
    "DEFAULT_GRIDS",
    "ClassifierSpec",
    "DecisionTree",
    "EvalReport",
    "GaussianNaiveBayes",
    "LogisticRegression",
    "Metrics",
    "Model",
    "RandomForest",
    "compute_metrics",
    "cross_validate",
    "evaluate_cross_project",
    "evaluate_within_project",
    "grid_points",
    "grid_search",
    "reports_to_csv",
    "roc_auc",
    "stratified_folds",
    "train_classifier",
]
