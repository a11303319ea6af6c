"""Per-developer sentiment/activeness features and labeled datasets."""

from __future__ import annotations

import csv
import io
import warnings
from fractions import Fraction
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .graphs import AnalysisWindow
from .ingest import UNRESOLVED, Corpus, DataWarning, Mood
from .smells import LABEL_FIELDS, DeveloperLabels

# Column order of the feature table; pruning drops the later member of a pair.
FEATURE_NAMES = (
    "VAL", "ARO", "DOM", "SAD", "ANG", "LOV", "JOY", "POS", "NEG", "POL",
    "IND", "IMP", "CON", "SUB", "MOD", "SEN", "COR", "SPO",
)
CLASS_NAMES = LABEL_FIELDS
FIXED_DROP_LIST = ("VAL", "DOM", "CON")

WORK_START_HOUR = 9
WORK_END_HOUR = 17


@dataclass(frozen=True)
class FeatureVector:
    val: float = 0.0
    aro: float = 0.0
    dom: float = 0.0
    sad: float = 0.0
    ang: float = 0.0
    lov: float = 0.0
    joy: float = 0.0
    pos: float = 0.0
    neg: float = 0.0
    pol: float = 0.0
    ind: float = 0.0
    imp: float = 0.0
    con: float = 0.0
    sub: float = 0.0
    mod: float = 0.0
    sen: int = 0
    cor: int = 0
    spo: int = 0

    @property
    def low_evidence(self) -> bool:
        return self.sen == 0

    def as_dict(self) -> dict[str, float]:
        return {f.name.upper(): getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, values: Mapping[str, float]) -> "FeatureVector":
        kw = {}
        for f in fields(cls):
            v = values[f.name.upper()]
            kw[f.name] = int(v) if f.name in ("sen", "cor", "spo") else float(v)
        return cls(**kw)


@dataclass(frozen=True)
class DatasetRow:
    developer: int
    project: str
    features: FeatureVector
    classes: Mapping[str, int]


@dataclass
class Dataset:
    scope: str
    rows: list[DatasetRow]
    active_features: tuple[str, ...] = FEATURE_NAMES
    dropped: int = 0
    dropped_smelly: int = 0

    def __post_init__(self):
        unknown = set(self.active_features) - set(FEATURE_NAMES)
        if unknown:
            raise ValueError(f"unknown features {sorted(unknown)}")
        keys = [(r.developer, r.project) for r in self.rows]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (developer, project) rows")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def projects(self) -> list[str]:
        return sorted({r.project for r in self.rows})

    def matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        names = self.active_features if names is None else names
        if not self.rows:
            return np.empty((0, len(names)))
        return np.array([[r.features.as_dict()[n] for n in names] for r in self.rows], dtype=float)

    def target(self, class_name: str) -> np.ndarray:
        if class_name not in CLASS_NAMES:
            raise KeyError(f"unknown class {class_name!r}")
        return np.array([r.classes[class_name] for r in self.rows], dtype=int)

    def subset(self, indices: Iterable[int], scope: str | None = None) -> "Dataset":
        return replace(self, rows=[self.rows[i] for i in indices], scope=scope or self.scope)

    def within(self, project: str) -> "Dataset":
        return self.subset(
            [i for i, r in enumerate(self.rows) if r.project == project],
            scope=f"within_project:{project}",
        )


def _mean(values: Sequence[float]) -> float:
    return float(np.mean(values)) if len(values) else 0.0


def classify_core(corpus: Corpus, window: AnalysisWindow, share: float = 0.8) -> set[int]:
    """Smallest top-committer set whose commits reach ``share`` of the window's commits.

    Developers are taken by descending commit count, ties by smallest id.
    """
    counts: dict[int, int] = {}
    for c, owner in zip(corpus.commits, corpus.commit_owners):
        if owner != UNRESOLVED and window.contains(c.timestamp):
            counts[owner] = counts.get(owner, 0) + 1
    total = sum(counts.values())
    target = Fraction(str(share)) * total
    core: set[int] = set()
    acc = 0
    for dev, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if total and acc >= target:
            break
        core.add(dev)
        acc += n
    return core


def _working_hours(local) -> bool:
    return local.weekday() < 5 and WORK_START_HOUR <= local.hour < WORK_END_HOUR


def classify_sponsored(corpus: Corpus, window: AnalysisWindow) -> set[int]:
    """Developers whose every commit in the window falls Mon-Fri 09:00-17:00 local time."""
    status: dict[int, bool] = {}
    for c, owner in zip(corpus.commits, corpus.commit_owners):
        if owner != UNRESOLVED and window.contains(c.timestamp):
            status[owner] = status.get(owner, True) and _working_hours(c.local_time)
    return {dev for dev, ok in status.items() if ok}


def aggregate_features(
    developer: int,
    corpus: Corpus,
    core_sets: Sequence[set[int]] = (),
    sponsored_sets: Sequence[set[int]] = (),
) -> FeatureVector:
    """Aggregate one developer's sentences and window roles into a feature vector."""
    sents = [s for s, o in zip(corpus.sentences, corpus.sentence_owners) if o == developer]
    cor = sum(developer in s for s in core_sets)
    spo = sum(developer in s for s in sponsored_sets)
    if not sents:
        return FeatureVector(cor=cor, spo=spo)
    strengths = [s.sentiment_strength for s in sents]
    moods = [s.mood for s in sents if s.mood is not None]
    n_mood = len(moods)

    def mood_share(m: Mood) -> float:
        return moods.count(m) / n_mood if n_mood else 0.0

    return FeatureVector(
        val=_mean([s.valence for s in sents]),
        aro=_mean([s.arousal for s in sents]),
        dom=_mean([s.dominance for s in sents]),
        sad=_mean([s.sad for s in sents]),
        ang=_mean([s.anger for s in sents]),
        lov=_mean([s.love for s in sents]),
        joy=_mean([s.joy for s in sents]),
        pos=_mean([v for v in strengths if v > 0]),
        neg=_mean([v for v in strengths if v < 0]),
        pol=sum(s.polite for s in sents) / len(sents),
        ind=mood_share(Mood.INDICATIVE),
        imp=mood_share(Mood.IMPERATIVE),
        con=mood_share(Mood.CONDITIONAL),
        sub=mood_share(Mood.SUBJUNCTIVE),
        mod=_mean([s.modality for s in sents]),
        sen=len(sents),
        cor=cor,
        spo=spo,
    )


@dataclass
class ProjectAnalysis:
    """Everything the dataset stage needs from one project."""

    corpus: Corpus
    windows: list[AnalysisWindow]
    labels: list[DeveloperLabels]
    core_sets: list[set[int]] = field(default_factory=list)
    sponsored_sets: list[set[int]] = field(default_factory=list)

    @property
    def project(self) -> str:
        return self.corpus.project


def project_rows(analysis: ProjectAnalysis) -> tuple[list[DatasetRow], int, int]:
    """Rows for every developer with attributed sentences.

    Returns ``(rows, dropped, dropped_smelly)`` where dropped developers are
    labeled (active in commits or mail) but have no attributed sentences.
    """
    corpus = analysis.corpus
    with_sentences = {o for o in corpus.sentence_owners if o != UNRESOLVED}
    labels = {lab.developer: lab for lab in analysis.labels}
    rows = []
    for dev in sorted(with_sentences):
        lab = labels.get(dev)
        classes = {c: (getattr(lab, c) if lab else 0) for c in CLASS_NAMES}
        fv = aggregate_features(dev, corpus, analysis.core_sets, analysis.sponsored_sets)
        rows.append(DatasetRow(dev, analysis.project, fv, classes))
    missing = [lab for dev, lab in labels.items() if dev not in with_sentences]
    return rows, len(missing), sum(lab.smelly_developer for lab in missing)


def assemble_dataset(analyses: Sequence[ProjectAnalysis], project: str | None = None) -> Dataset:
    """Pool rows from all projects (``project=None``) or keep a single project.

    A person active in k projects contributes k rows.
    """
    chosen = [a for a in analyses if project is None or a.project == project]
    if project is not None and not chosen:
        raise KeyError(f"unknown project {project!r}")
    rows: list[DatasetRow] = []
    dropped = dropped_smelly = 0
    for a in chosen:
        r, d, ds = project_rows(a)
        rows.extend(r)
        dropped += d
        dropped_smelly += ds
    if dropped:
        warnings.warn(
            f"{dropped} labeled developer(s) without sentiment data dropped "
            f"({dropped_smelly} smelly)",
            DataWarning,
            stacklevel=2,
        )
    scope = "cross_project" if project is None else f"within_project:{project}"
    return Dataset(scope, rows, FEATURE_NAMES, dropped, dropped_smelly)


def undersample(dataset: Dataset, class_name: str, seed: int) -> Dataset:
    """Randomly drop majority-class rows (without replacement) down to a 1:1 ratio."""
    y = dataset.target(class_name)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError(f"class {class_name!r} has a single value in this dataset")
    minority, majority = (pos, neg) if len(pos) <= len(neg) else (neg, pos)
    rng = np.random.default_rng(seed)
    kept = rng.choice(majority, size=len(minority), replace=False)
    keep = np.sort(np.concatenate([minority, kept]))
    return dataset.subset(keep.tolist())


def spearman_matrix(x: np.ndarray) -> np.ndarray:
    """Pairwise Spearman correlation; constant columns correlate 0 with everything."""
    n, d = x.shape
    ranks = np.column_stack([rankdata(x[:, j]) for j in range(d)]) if d else x
    centered = ranks - ranks.mean(axis=0)
    norm = np.sqrt((centered**2).sum(axis=0))
    constant = norm == 0
    safe = np.where(constant, 1.0, norm)
    rho = (centered.T @ centered) / np.outer(safe, safe)
    rho[constant, :] = 0.0
    rho[:, constant] = 0.0
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)


def prune_correlated(
    dataset: Dataset, threshold: float = 0.9, fixed_drop_list: bool = False
) -> tuple[Dataset, list[str]]:
    """Drop features until no active pair has ``|rho| > threshold``.

    Scanning in table order, a feature is dropped when it correlates above the
    threshold with an earlier feature that is still kept. With
    ``fixed_drop_list`` the fixed list VAL, DOM, CON is removed instead.
    """
    active = list(dataset.active_features)
    if fixed_drop_list:
        dropped = [f for f in active if f in FIXED_DROP_LIST]
        kept = tuple(f for f in active if f not in FIXED_DROP_LIST)
        return replace(dataset, active_features=kept), dropped
    if len(dataset) < 2:
        raise ValueError("correlation pruning needs at least two rows")
    x = dataset.matrix(active)
    const = [f for f, sd in zip(active, x.std(axis=0)) if sd == 0]
    if const:
        warnings.warn(f"constant features {const}: correlation taken as 0", DataWarning, stacklevel=2)
    rho = spearman_matrix(x)
    kept_idx: list[int] = []
    dropped = []
    for j, name in enumerate(active):
        if any(abs(rho[i, j]) > threshold for i in kept_idx):
            dropped.append(name)
        else:
            kept_idx.append(j)
    return replace(dataset, active_features=tuple(active[i] for i in kept_idx)), dropped


# -- CSV interchange ---------------------------------------------------------

def dataset_to_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["developer", "project", *FEATURE_NAMES, *CLASS_NAMES])
    for r in dataset.rows:
        fv = r.features.as_dict()
        w.writerow([r.developer, r.project, *(repr(fv[f]) for f in FEATURE_NAMES),
                    *(r.classes[c] for c in CLASS_NAMES)])
    return buf.getvalue()


def dataset_from_csv(text: str, scope: str = "cross_project") -> Dataset:
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append(
            DatasetRow(
                developer=int(r["developer"]),
                project=r["project"],
                features=FeatureVector.from_dict({f: float(r[f]) for f in FEATURE_NAMES}),
                classes={c: int(r[c]) for c in CLASS_NAMES},
            )
        )
    return Dataset(scope, rows)


def dataset_from_arrays(
    x: np.ndarray,
    labels: Mapping[str, np.ndarray],
    project: str = "synthetic",
    names: Sequence[str] = FEATURE_NAMES,
) -> Dataset:
    """Wrap a plain feature matrix as a dataset (missing features and classes are 0)."""
    rows = []
    for i in range(x.shape[0]):
        values = dict.fromkeys(FEATURE_NAMES, 0.0)
        values.update({n: float(x[i, j]) for j, n in enumerate(names)})
        classes = {c: int(labels[c][i]) if c in labels else 0 for c in CLASS_NAMES}
        rows.append(DatasetRow(i, project, FeatureVector.from_dict(values), classes))
    return Dataset("cross_project", rows, tuple(names))
