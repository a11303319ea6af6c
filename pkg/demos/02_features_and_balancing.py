"""From raw project data to a balanced, pruned feature table.

A synthetic corpus with planted smells is generated, ingested, checked for
smells, and turned into one row of 18 sentiment and activity features per
developer.
"""
import tempfile
import warnings
from pathlib import Path

import numpy as np

from commsmell.features import prune_correlated, spearman_matrix, undersample
from commsmell.pipeline import Pipeline, RunConfig
from commsmell.synthetic import SyntheticSpec, generate_synthetic_corpus

workdir = Path(tempfile.mkdtemp())
spec = SyntheticSpec(projects=2, developers=60, silo_pairs=2, wolf_pairs=2, bottleneck_bridges=2, quitters=2)
generate_synthetic_corpus(spec, seed=1, out_dir=workdir)

pipe = Pipeline(RunConfig.load(workdir / "config.json"))
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    pipe.ingest()
    pipe.detect()
    pipe.featurize()
dataset = pipe._dataset()
print(f"{len(dataset)} developers, projects {dataset.projects}")
print("features:", " ".join(dataset.active_features))

# the classes are heavily imbalanced
for cls in ("silo", "lone_wolf", "bottleneck", "smelly_developer", "smelly_quitter"):
    y = dataset.target(cls)
    print(f"  {cls:<17} {int(y.sum()):3d} smelly / {int(len(y) - y.sum()):3d} clean")

# undersampling keeps every smelly developer and an equal-sized random clean sample
balanced = undersample(dataset, "smelly_developer", seed=0)
print("balanced smelly_developer rows:", len(balanced), "positives:", int(balanced.target("smelly_developer").sum()))

# the three VAD averages move together, so the pruning pass drops some of them
rho = spearman_matrix(dataset.matrix(["VAL", "ARO", "DOM"]))
print("Spearman VAL/ARO/DOM:\n", np.round(rho, 3))
pruned, dropped = prune_correlated(dataset, threshold=0.9)
print("dropped by |rho| > 0.9:", dropped)
_, fixed = prune_correlated(dataset, fixed_drop_list=True)
print("dropped by the fixed list:", fixed)
