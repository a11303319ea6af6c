"""Every stage from the command line, as a user would run it.

Equivalent shell session:

    commsmell synth --out corpus --seed 0
    commsmell all --config corpus/config.json --out results
"""
import json
import tempfile
from pathlib import Path

from commsmell.cli import main

workdir = Path(tempfile.mkdtemp())
main(["synth", "--out", str(workdir / "corpus"), "--seed", "0"])

# a lighter run: a single class and a smaller grid
config = json.loads((workdir / "corpus" / "config.json").read_text())
config.update({"classes": ["smelly_developer"], "grid": {"n_trees": [10, 50]}})
(workdir / "corpus" / "config.json").write_text(json.dumps(config))

status = main(["all", "--config", str(workdir / "corpus" / "config.json"), "--out", str(workdir / "results")])
print("exit status:", status)

results = workdir / "results"
report = json.loads((results / "evaluation.json").read_text())["reports"][0]
print("cross-project medians:", {k: round(v, 3) for k, v in report["medians"].items()})
print((results / "ranking.csv").read_text().splitlines()[:6])
manifest = json.loads((results / "manifest.json").read_text())
print("manifest stages:", list(manifest["stages"]), "seed:", manifest["seed"])

# a stage whose input is missing reports it and exits with status 2
print("train in an empty dir ->", main(["train", "--config", str(workdir / "corpus" / "config.json"),
                                         "--out", str(workdir / "empty")]))
