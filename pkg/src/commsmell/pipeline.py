"""Stage-by-stage pipeline over CSV/JSON artifacts, with a reproducibility manifest."""

from __future__ import annotations

import hashlib
import json
import platform
import time
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .features import (
    CLASS_NAMES,
    FEATURE_NAMES,
    ProjectAnalysis,
    assemble_dataset,
    classify_core,
    classify_sponsored,
    dataset_from_csv,
    dataset_to_csv,
    prune_correlated,
    undersample,
)
from .graphs import (
    build_collaboration_graph,
    build_communication_graph,
    detect_communities,
    dumps_window_summaries,
    edge_list_lines,
    make_windows,
    window_summary,
)
from .ingest import UNRESOLVED, Corpus, corpus_from_dict, corpus_to_dict, load_corpus
from .learn import ALGORITHMS, ClassifierSpec, evaluate_cross_project, evaluate_within_project, grid_search
from .learn.validation import reports_to_csv
from .smells import derive_labels, detect_window_smells, labels_csv, read_labels_csv, smell_report_csv
from .stats import GainRanking, compare_populations, overall_ranking, rank_features, ranking_csv, sk_esd

EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_DATA = 0, 1, 2, 3

STAGES = ("ingest", "detect", "featurize", "train", "evaluate", "rank", "compare")

ARTIFACTS = {
    "ingest": ("corpus.json",),
    "detect": ("smells.csv", "labels.csv"),
    "featurize": ("dataset.csv",),
    "train": ("models.json",),
    "evaluate": ("evaluation.csv", "evaluation.json"),
    "rank": ("ranking.csv",),
    "compare": ("comparison.csv",),
}
REQUIRES = {
    "ingest": (),
    "detect": ("corpus.json",),
    "featurize": ("corpus.json", "labels.csv"),
    "train": ("dataset.csv",),
    "evaluate": ("dataset.csv", "models.json"),
    "rank": ("dataset.csv", "models.json"),
    "compare": ("dataset.csv",),
}
PRODUCED_BY = {name: stage for stage, names in ARTIFACTS.items() for name in names}
MANIFEST = "manifest.json"
TIMINGS = "timings.json"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration: " + "; ".join(problems))
        self.problems = problems


class MissingArtifact(RuntimeError):
    def __init__(self, stage: str, artifact: str):
        super().__init__(
            f"stage {stage!r} needs {artifact!r}; run {PRODUCED_BY.get(artifact, '?')!r} first"
        )
        self.stage, self.artifact = stage, artifact


@dataclass
class ProjectSource:
    name: str
    commits: Path
    mailbox: Path
    sentences: Path


@dataclass
class RunConfig:
    projects: list[ProjectSource]
    output_dir: Path
    window_days: int = 90
    communication_mode: str = "reply"
    correlation_threshold: float = 0.9
    fixed_drop_list: bool = False
    classifier: str = "random_forest"
    grid: dict | None = None
    seed: int = 0
    repetitions: int = 10
    folds: int = 10
    classes: tuple[str, ...] = CLASS_NAMES
    dump_graphs: bool = False

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path("."), check_paths: bool = True) -> "RunConfig":
        problems = []
        known = set(cls.__dataclass_fields__) | {"output_dir"}
        for key in sorted(set(data) - known):
            problems.append(f"{key}: unknown field")
        projects = []
        raw_projects = data.get("projects")
        if not isinstance(raw_projects, list) or not raw_projects:
            problems.append("projects: must be a non-empty list")
            raw_projects = []
        names = set()
        for i, p in enumerate(raw_projects):
            try:
                src = ProjectSource(
                    name=str(p["name"]),
                    commits=(base / p["commits"]),
                    mailbox=(base / p["mailbox"]),
                    sentences=(base / p["sentences"]),
                )
            except (KeyError, TypeError) as exc:
                problems.append(f"projects[{i}]: missing {exc}")
                continue
            if src.name in names:
                problems.append(f"projects[{i}].name: duplicate {src.name!r}")
            names.add(src.name)
            if check_paths:
                for role in ("commits", "mailbox", "sentences"):
                    if not getattr(src, role).exists():
                        problems.append(f"projects[{i}].{role}: {getattr(src, role)} does not exist")
            projects.append(src)

        def get(key, kind, default, ok=lambda v: True, why="invalid value"):
            value = data.get(key, default)
            try:
                value = kind(value) if value is not None else value
            except (TypeError, ValueError):
                problems.append(f"{key}: expected {kind.__name__}")
                return default
            if value is not None and not ok(value):
                problems.append(f"{key}: {why}")
            return value

        cfg = cls(
            projects=projects,
            output_dir=base / data.get("output_dir", "out"),
            window_days=get("window_days", int, 90, lambda v: v > 0, "must be positive"),
            communication_mode=get("communication_mode", str, "reply",
                                   lambda v: v in ("reply", "co-thread"), "must be 'reply' or 'co-thread'"),
            correlation_threshold=get("correlation_threshold", float, 0.9,
                                      lambda v: 0 < v <= 1, "must be in (0, 1]"),
            fixed_drop_list=get("fixed_drop_list", bool, False),
            classifier=get("classifier", str, "random_forest", lambda v: v in ALGORITHMS,
                           f"must be one of {ALGORITHMS}"),
            grid=data.get("grid"),
            seed=get("seed", int, 0),
            repetitions=get("repetitions", int, 10, lambda v: v > 0, "must be positive"),
            folds=get("folds", int, 10, lambda v: v >= 2, "must be at least 2"),
            classes=tuple(data.get("classes", CLASS_NAMES)),
            dump_graphs=get("dump_graphs", bool, False),
        )
        bad = set(cfg.classes) - set(CLASS_NAMES)
        if bad:
            problems.append(f"classes: unknown {sorted(bad)}")
        if cfg.grid is not None and not isinstance(cfg.grid, dict):
            problems.append("grid: must be an object mapping parameter names to lists")
        if problems:
            raise ConfigError(problems)
        return cfg

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"config: cannot read {path} ({exc})"]) from exc
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(data, path.parent)

    def digest(self) -> str:
        payload = {
            "projects": [p.name for p in self.projects],
            "window_days": self.window_days,
            "communication_mode": self.communication_mode,
            "correlation_threshold": self.correlation_threshold,
            "fixed_drop_list": self.fixed_drop_list,
            "classifier": self.classifier,
            "grid": self.grid,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "folds": self.folds,
            "classes": list(self.classes),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


class Pipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.output_dir)

    def path(self, name: str) -> Path:
        return self.out / name

    def _require(self, stage: str) -> None:
        for name in REQUIRES[stage]:
            if not self.path(name).exists():
                raise MissingArtifact(stage, name)

    # -- stages ------------------------------------------------------------

    def ingest(self) -> None:
        corpora = [
            load_corpus(p.name, p.commits, p.mailbox, p.sentences) for p in self.config.projects
        ]
        doc = {"projects": [corpus_to_dict(c) for c in corpora]}
        _write(self.path("corpus.json"), json.dumps(doc, sort_keys=True, ensure_ascii=False))

    def _corpora(self) -> list[Corpus]:
        doc = json.loads(self.path("corpus.json").read_text(encoding="utf-8"))
        return [corpus_from_dict(d) for d in doc["projects"]]

    def _activity(self, corpus: Corpus, windows) -> list[set[int]]:
        activity = []
        for w in windows:
            act = {o for c, o in zip(corpus.commits, corpus.commit_owners) if w.contains(c.timestamp)}
            act |= {o for m, o in zip(corpus.messages, corpus.message_owners) if w.contains(m.timestamp)}
            act.discard(UNRESOLVED)
            activity.append(act)
        return activity

    def detect(self) -> None:
        cfg = self.config
        smell_rows, labels, summaries, edges = [], [], [], []
        for corpus in self._corpora():
            windows = make_windows(corpus, cfg.window_days)
            assignments = []
            for w in windows:
                collab = build_collaboration_graph(corpus, w)
                comm = build_communication_graph(corpus, w, cfg.communication_mode)
                partition = detect_communities(comm)
                found = detect_window_smells(w.index, collab, comm, partition)
                assignments.extend(found)
                smell_rows.extend((corpus.project, a) for a in found)
                if cfg.dump_graphs:
                    summaries.append({"project": corpus.project, **window_summary(w, collab, comm, partition)})
                    edges.extend(f"{corpus.project} {line}" for g in (collab, comm)
                                 for line in edge_list_lines(g, w.index))
            labels.extend(derive_labels(assignments, self._activity(corpus, windows), corpus.project))
        _write(self.path("smells.csv"), smell_report_csv(smell_rows))
        _write(self.path("labels.csv"), labels_csv(labels))
        if cfg.dump_graphs:
            _write(self.path("graphs/edges.txt"), "".join(line + "\n" for line in edges))
            _write(self.path("graphs/windows.json"), dumps_window_summaries(summaries) + "\n")

    def analyses(self) -> list[ProjectAnalysis]:
        labels = read_labels_csv(self.path("labels.csv").read_text(encoding="utf-8"))
        out = []
        for corpus in self._corpora():
            windows = make_windows(corpus, self.config.window_days)
            out.append(ProjectAnalysis(
                corpus=corpus,
                windows=windows,
                labels=[lab for lab in labels if lab.project == corpus.project],
                core_sets=[classify_core(corpus, w) for w in windows],
                sponsored_sets=[classify_sponsored(corpus, w) for w in windows],
            ))
        return out

    def featurize(self) -> None:
        dataset = assemble_dataset(self.analyses())
        _write(self.path("dataset.csv"), dataset_to_csv(dataset))

    def _dataset(self):
        return dataset_from_csv(self.path("dataset.csv").read_text(encoding="utf-8"))

    def train(self) -> None:
        cfg = self.config
        dataset = self._dataset()
        pruned, dropped = prune_correlated(dataset, cfg.correlation_threshold, cfg.fixed_drop_list)
        selected, skipped = {}, {}
        for cls in cfg.classes:
            try:
                balanced = undersample(pruned, cls, cfg.seed)
            except ValueError as exc:
                skipped[cls] = str(exc)
                continue
            spec = grid_search(cfg.classifier, cfg.grid, balanced.matrix(), balanced.target(cls),
                               cfg.seed, cfg.folds)
            selected[cls] = spec.as_dict()
        doc = {
            "active_features": list(pruned.active_features),
            "dropped_features": dropped,
            "selected": selected,
            "skipped": skipped,
            "rows": len(dataset),
        }
        _write(self.path("models.json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def _models(self) -> dict:
        return json.loads(self.path("models.json").read_text(encoding="utf-8"))

    def evaluate(self) -> None:
        cfg = self.config
        models = self._models()
        dataset = replace(self._dataset(), active_features=tuple(models["active_features"]))
        reports, skipped = [], []
        for cls, spec_d in models["selected"].items():
            spec = ClassifierSpec.from_dict(spec_d)
            balanced = undersample(dataset, cls, cfg.seed)
            reports.append(evaluate_cross_project(balanced, cls, spec, cfg.seed, cfg.repetitions, cfg.folds))
            for project in dataset.projects:
                within = dataset.within(project)
                y = within.target(cls)
                if min(int(y.sum()), int(len(y) - y.sum())) < 2:
                    skipped.append({"class": cls, "scenario": f"within:{project}",
                                    "reason": "fewer than 2 rows in a class"})
                    continue
                reports.append(evaluate_within_project(undersample(within, cls, cfg.seed), cls, spec))
        _write(self.path("evaluation.csv"), reports_to_csv(reports))
        doc = {"reports": [r.to_dict() for r in reports], "skipped": skipped}
        _write(self.path("evaluation.json"), json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def rank(self) -> None:
        cfg = self.config
        models = self._models()
        dataset = replace(self._dataset(), active_features=tuple(models["active_features"]))
        rankings = []
        cross, within = [], []
        for cls in models["selected"]:
            balanced = undersample(dataset, cls, cfg.seed)
            cross.append(rank_features(balanced, cls, cfg.seed, "cross", cfg.repetitions, cfg.folds))
            pooled: dict[str, list[float]] = {}
            for project in dataset.projects:
                sub = dataset.within(project)
                y = sub.target(cls)
                if min(int(y.sum()), int(len(y) - y.sum())) < 2:
                    continue
                r = rank_features(undersample(sub, cls, cfg.seed), cls, cfg.seed, "within",
                                  cfg.repetitions, cfg.folds)
                for f, v in r.samples.items():
                    pooled.setdefault(f, []).extend(v)
            if pooled:
                gains = {f: float(np.mean(v)) for f, v in pooled.items()}
                within.append(GainRanking("within", cls, gains, sk_esd(pooled), pooled))
        for group in (cross, within):
            if group:
                rankings.extend(group)
                rankings.append(overall_ranking(group))
        _write(self.path("ranking.csv"), ranking_csv(rankings))

    def compare(self) -> None:
        dataset = self._dataset()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = compare_populations(dataset, "smelly_developer", FEATURE_NAMES)
        _write(self.path("comparison.csv"), result.to_csv())

    # -- orchestration -----------------------------------------------------

    def _inputs(self, stage: str) -> dict[str, str]:
        if stage == "ingest":
            return {
                f"{p.name}/{role}": _sha256(getattr(p, role))
                for p in self.config.projects
                for role in ("commits", "mailbox", "sentences")
            }
        return {name: _sha256(self.path(name)) for name in REQUIRES[stage]}

    def run_stage(self, stage: str) -> dict:
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self._require(stage)
        self.out.mkdir(parents=True, exist_ok=True)
        inputs = self._inputs(stage)
        started = time.perf_counter()
        getattr(self, stage)()
        elapsed = time.perf_counter() - started
        outputs = {name: _sha256(self.path(name)) for name in ARTIFACTS[stage]}
        return {"inputs": inputs, "outputs": outputs, "seconds": elapsed}

    def run(self, stages=STAGES) -> dict:
        manifest_path = self.path(MANIFEST)
        timings_path = self.path(TIMINGS)
        manifest = {"stages": {}}
        timings = {}
        if manifest_path.exists() and tuple(stages) != STAGES:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
            if timings_path.exists():
                timings = json.loads(timings_path.read_text(encoding="utf-8"))
        for stage in stages:
            record = self.run_stage(stage)
            timings[stage] = record.pop("seconds")
            manifest["stages"][stage] = record
        manifest.update({
            "seed": self.config.seed,
            "config_digest": self.config.digest(),
            "versions": {
                "commsmell": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
        })
        _write(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        _write(timings_path, json.dumps(timings, indent=2, sort_keys=True) + "\n")
        return manifest

