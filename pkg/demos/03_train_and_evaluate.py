"""Grid search, 10x10 cross-validation and leave-one-out on a feature table.

The table is drawn directly with planted sentiment shifts: smelly developers
use fewer imperative sentences, are less polite and show more joy.
"""
import numpy as np

from commsmell.learn.models import ClassifierSpec, train_classifier
from commsmell.learn.validation import evaluate_cross_project, evaluate_within_project, grid_search
from commsmell.synthetic import feature_table

dataset = feature_table(n_smelly=60, n_clean=60, seed=3)
X, y = dataset.matrix(), dataset.target("smelly_developer")

# pick hyper-parameters by mean F-measure over stratified folds
for algorithm in ("decision_tree", "random_forest", "logistic_regression", "gaussian_naive_bayes"):
    spec = grid_search(algorithm, None, X, y, seed=0)
    report = evaluate_cross_project(dataset, "smelly_developer", spec, seed=0)
    med = report.medians
    print(f"{algorithm:<21} {dict(spec.hyper_parameters)!s:<40} "
          f"F={med['f_measure']:.3f} AUC={med['auc']:.3f} folds={len(report.folds)}")

# leave-one-out pools all 120 held-out predictions into one confusion matrix
loo = evaluate_within_project(dataset, "smelly_developer", ClassifierSpec("logistic_regression"))
print("leave-one-out F:", round(loo.medians["f_measure"], 3))

# a fitted tree exposes the split it found most useful first
model = train_classifier(ClassifierSpec("decision_tree", {"max_depth": 1}), X, y, dataset.active_features)
proba = model.predict_proba(X)
print("depth-1 tree training accuracy:", np.mean((proba > 0.5) == y))
