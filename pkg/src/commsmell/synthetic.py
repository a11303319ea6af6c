"""Synthetic corpora with planted community smells and shifted sentiment.

Non-smelly developers work in teams: every team shares files and every pair
of members exchanges replies, so no smell arises inside a team. Smells are
planted on top of that background:

* silo pairs co-commit a private file and never write to the mailing list;
* lone-wolf pairs co-commit a private file and talk to the same team, but
  never to each other;
* bottleneck bridges join two teams by a single reply edge, which makes both
  endpoints unique boundary spanners.

Planted smelly developers draw their sentence annotations from shifted
distributions (imperative mood, politeness and joy follow the smelly vs
non-smelly means reported for real projects).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from email.utils import format_datetime
from pathlib import Path

import numpy as np

from .features import Dataset, FeatureVector, DatasetRow, CLASS_NAMES, aggregate_features
from .ingest import Corpus, Mood, SentenceRecord, SENTENCE_COLUMNS

EPOCH = datetime(2010, 1, 4, tzinfo=timezone.utc)  # a Monday
TZ_OFFSETS = (-480, -300, 0, 60, 120, 330, 480)

# per-sentence probabilities: (smelly, non-smelly)
MOOD_PROBS = {
    True: {Mood.INDICATIVE: 0.70, Mood.IMPERATIVE: 0.09, Mood.CONDITIONAL: 0.15, Mood.SUBJUNCTIVE: 0.06},
    False: {Mood.INDICATIVE: 0.55, Mood.IMPERATIVE: 0.26, Mood.CONDITIONAL: 0.13, Mood.SUBJUNCTIVE: 0.06},
}
FLAG_PROBS = {
    True: {"polite": 0.54, "joy": 0.08, "love": 0.14, "sad": 0.10, "anger": 0.05},
    False: {"polite": 0.67, "joy": 0.02, "love": 0.13, "sad": 0.10, "anger": 0.05},
}
# developer-level heterogeneity: proportions drawn from Beta(mean * k, (1 - mean) * k)
CONCENTRATION = 60.0


@dataclass
class SyntheticSpec:
    projects: int = 3
    developers: int = 80
    windows: int = 4
    window_days: int = 90
    team_size: int = 5
    silo_pairs: int = 3
    wolf_pairs: int = 3
    bottleneck_bridges: int = 3
    quitters: int = 3
    unresolved: int = 0
    sentences: tuple[int, int] = (60, 120)
    mood_missing: float = 0.05

    @property
    def planted_per_project(self) -> int:
        return 2 * (self.silo_pairs + self.wolf_pairs + self.bottleneck_bridges)

    def validate(self) -> None:
        pair_devs = 2 * (self.silo_pairs + self.wolf_pairs)
        team_devs = self.developers - pair_devs
        if min(self.projects, self.developers, self.windows, self.window_days) < 1:
            raise ValueError("projects, developers, windows and window_days must be positive")
        if team_devs < 0:
            raise ValueError(
                f"{pair_devs} planted pair developers exceed {self.developers} developers"
            )
        if self.team_size < 3:
            raise ValueError("team_size must be at least 3")
        n_teams = team_devs // self.team_size
        if self.wolf_pairs and n_teams < 1:
            raise ValueError("lone-wolf pairs need at least one team to talk to")
        if self.bottleneck_bridges and n_teams < 2 * self.bottleneck_bridges:
            raise ValueError(f"{self.bottleneck_bridges} bridges need {2 * self.bottleneck_bridges} teams")
        if self.quitters > 2 * (self.silo_pairs + self.wolf_pairs):
            raise ValueError("quitters are drawn from planted pair developers")
        if self.quitters and self.windows < 2:
            raise ValueError("quitters need at least two windows")
        if self.unresolved > self.planted_per_project:
            raise ValueError("more unresolved developers than planted smelly developers")


@dataclass
class _Dev:
    key: int
    name: str
    email: str
    tz: int
    sponsored: bool
    smelly: bool = False
    files: list[str] = field(default_factory=list)
    last_window: int = 10**9


def _local_commit_time(rng, window_start: datetime, days: float, dev: _Dev) -> datetime:
    """UTC instant of a commit; sponsored developers commit on weekdays 10-16h local."""
    local_day = window_start + timedelta(minutes=dev.tz) + timedelta(days=int(days))
    local_day = local_day.replace(hour=0, minute=0, second=0)
    if dev.sponsored:
        while local_day.weekday() >= 5:
            local_day -= timedelta(days=1)
        local = local_day + timedelta(hours=int(rng.integers(10, 16)), minutes=int(rng.integers(0, 60)))
    else:
        local = local_day + timedelta(hours=int(rng.integers(0, 24)), minutes=int(rng.integers(0, 60)))
    return local - timedelta(minutes=dev.tz)


def _beta(rng, mean: float) -> float:
    return float(rng.beta(mean * CONCENTRATION, (1 - mean) * CONCENTRATION))


def developer_sentences(rng, project: str, developer: str, smelly: bool, start: datetime,
                        span_days: float, n: int, mood_missing: float = 0.05) -> list[SentenceRecord]:
    """Annotated sentences for one developer."""
    flags = {k: _beta(rng, p) for k, p in FLAG_PROBS[smelly].items()}
    moods = list(MOOD_PROBS[smelly])
    mood_p = rng.dirichlet([MOOD_PROBS[smelly][m] * CONCENTRATION for m in moods])
    latent = rng.normal()
    out = []
    for _ in range(n):
        u = rng.random()
        if u < 0.45:
            strength = round(float(rng.uniform(0.1, 1.0)), 3)
        elif u < 0.8:
            strength = round(float(rng.uniform(-1.0, -0.1)), 3)
        else:
            strength = 0.0
        mood = None if rng.random() < mood_missing else moods[rng.choice(4, p=mood_p)]
        out.append(SentenceRecord(
            project=project,
            developer=developer,
            timestamp=start + timedelta(seconds=int(rng.uniform(0, span_days * 86400))),
            valence=round(1.0 + 0.3 * latent + float(rng.normal(0, 0.2)), 4),
            arousal=round(1.0 + 0.28 * latent + float(rng.normal(0, 0.2)), 4),
            dominance=round(1.0 + 0.32 * latent + float(rng.normal(0, 0.2)), 4),
            sad=int(rng.random() < flags["sad"]),
            anger=int(rng.random() < flags["anger"]),
            love=int(rng.random() < flags["love"]),
            joy=int(rng.random() < flags["joy"]),
            sentiment_strength=strength,
            polite=int(rng.random() < flags["polite"]),
            mood=mood,
            modality=round(float(np.clip(rng.normal(0.3, 0.3), -1, 1)), 3),
        ))
    return out


def feature_table(n_smelly: int, n_clean: int, seed: int, sentences=(30, 80)) -> Dataset:
    """Dataset of developers described only by sentences (no graphs).

    ``smelly_developer`` is 1 for the first ``n_smelly`` rows; the other
    classes are 0.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_smelly + n_clean):
        smelly = i < n_smelly
        sents = developer_sentences(rng, "table", f"d{i}", smelly, EPOCH, 360,
                                    int(rng.integers(sentences[0], sentences[1] + 1)))
        corpus = Corpus("table", sentences=sents, sentence_owners=[i] * len(sents))
        fv: FeatureVector = aggregate_features(i, corpus)
        classes = dict.fromkeys(CLASS_NAMES, 0)
        classes["smelly_developer"] = int(smelly)
        rows.append(DatasetRow(i, "table", fv, classes))
    return Dataset("cross_project", rows)


class _ProjectBuilder:
    def __init__(self, spec: SyntheticSpec, name: str, rng: np.random.Generator):
        self.spec, self.name, self.rng = spec, name, rng
        self.commits: list[dict] = []
        self.messages: list[dict] = []
        self.planted: dict[str, list[str]] = {
            "silo": [], "lone_wolf": [], "bottleneck": [], "smelly_quitter": [], "unresolved": []
        }
        self._n_msg = 0
        self._n_commit = 0

    def window_start(self, w: int) -> datetime:
        return EPOCH + timedelta(days=w * self.spec.window_days)

    def commit(self, dev: _Dev, when: datetime, files: list[str]) -> None:
        self._n_commit += 1
        local = when + timedelta(minutes=dev.tz)
        sign = "+" if dev.tz >= 0 else "-"
        off = abs(dev.tz)
        self.commits.append({
            "id": f"{self.name}-c{self._n_commit:06d}",
            "name": dev.name,
            "email": dev.email,
            "ts": local.strftime("%Y-%m-%dT%H:%M:%S") + f"{sign}{off // 60:02d}:{off % 60:02d}",
            "tz_offset_minutes": dev.tz,
            "files": sorted(files),
        })

    def message(self, dev: _Dev, when: datetime, parent: str | None = None) -> str:
        self._n_msg += 1
        mid = f"{self.name}.{self._n_msg:06d}@lists.example.org"
        # mailing-list addresses differ in case from the commit log
        self.messages.append({"id": mid, "dev": dev, "when": when, "parent": parent})
        return mid

    def build(self) -> list[_Dev]:
        spec, rng = self.spec, self.rng
        devs = [
            _Dev(
                key=k,
                name=f"Dev {self.name} {k:03d}",
                email=f"dev{k:03d}@{self.name}.example.org",
                tz=int(rng.choice(TZ_OFFSETS)),
                sponsored=bool(rng.random() < 0.3),
            )
            for k in range(spec.developers)
        ]
        order = [int(i) for i in rng.permutation(spec.developers)]
        cursor = 0

        def take(n):
            nonlocal cursor
            chosen = [devs[i] for i in order[cursor:cursor + n]]
            cursor += n
            return chosen

        silo_pairs = [take(2) for _ in range(spec.silo_pairs)]
        wolf_pairs = [take(2) for _ in range(spec.wolf_pairs)]
        rest = take(spec.developers - cursor)
        n_teams = len(rest) // spec.team_size
        teams: list[list[_Dev]] = [[] for _ in range(max(n_teams, 1))]
        for i, d in enumerate(rest):
            teams[i % len(teams)].append(d)
        for t, team in enumerate(teams):
            for d in team:
                d.files = [f"team{t}/mod{j}.c" for j in range(3)]
        for p, pair in enumerate(silo_pairs + wolf_pairs):
            for d in pair:
                d.smelly = True
                d.files = [f"pair{p}/core.c"]
        # wolf pairs talk with a team, never with each other
        comm_teams = [list(team) for team in teams]
        wolf_home = {}
        for p, pair in enumerate(wolf_pairs):
            wolf_home[p] = p % len(teams)
            comm_teams[wolf_home[p]].extend(pair)
        bridges = []
        for b in range(spec.bottleneck_bridges):
            a, c = teams[2 * b][0], teams[2 * b + 1][0]
            a.smelly = c.smelly = True
            bridges.append((a, c))

        pair_devs = [d for pair in silo_pairs + wolf_pairs for d in pair]
        quitters = [pair_devs[int(i)] for i in rng.choice(len(pair_devs), spec.quitters, replace=False)] \
            if spec.quitters else []
        for d in quitters:
            d.last_window = spec.windows - 2

        self.planted["silo"] = sorted(d.email for pair in silo_pairs for d in pair)
        self.planted["lone_wolf"] = sorted(d.email for pair in silo_pairs + wolf_pairs for d in pair)
        self.planted["bottleneck"] = sorted(d.email for br in bridges for d in br)
        self.planted["smelly_quitter"] = sorted(d.email for d in quitters)

        forbidden = {frozenset((a.key, b.key)) for a, b in wolf_pairs}
        anchor = teams[0][0]
        self.commit(anchor, EPOCH, anchor.files[:1])
        for w in range(spec.windows):
            ws = self.window_start(w)
            usable = spec.window_days - 2
            for d in devs:
                if w > d.last_window:
                    continue
                for _ in range(int(rng.integers(2, 5))):
                    when = _local_commit_time(rng, ws, 1 + rng.uniform(0, usable - 1), d)
                    when = min(max(when, ws + timedelta(hours=12)), ws + timedelta(days=spec.window_days - 1))
                    n_files = min(len(d.files), int(rng.integers(1, 3)))
                    files = [str(f) for f in rng.choice(d.files, n_files, replace=False)]
                    self.commit(d, when, files)
            for team in comm_teams:
                active = [d for d in team if w <= d.last_window]
                for d in active:
                    t0 = ws + timedelta(days=1 + float(rng.uniform(0, usable - 4)))
                    root = self.message(d, t0)
                    for k, other in enumerate(o for o in active if o is not d):
                        if frozenset((d.key, other.key)) in forbidden:
                            continue
                        self.message(other, t0 + timedelta(hours=1 + k), root)
            for a, c in bridges:
                t0 = ws + timedelta(days=1 + float(rng.uniform(0, usable - 4)))
                root = self.message(a, t0)
                self.message(c, t0 + timedelta(hours=2), root)

        unresolved = [d for d in devs if d.smelly][: spec.unresolved]
        self.planted["unresolved"] = sorted(d.email for d in unresolved)
        self.skip_sentences = {d.key for d in unresolved}
        return devs

    def sentences(self, devs: list[_Dev]) -> list[SentenceRecord]:
        spec, rng = self.spec, self.rng
        span = spec.windows * spec.window_days
        out = []
        for d in devs:
            if d.key in self.skip_sentences:
                continue
            # sentence attribution uses the name (odd spacing, lower case) or the upper-cased e-mail
            alias = d.email.upper() if d.key % 2 else "  " + d.name.lower().replace(" ", "  ")
            n = int(rng.integers(spec.sentences[0], spec.sentences[1] + 1))
            out.extend(developer_sentences(rng, self.name, alias, d.smelly, EPOCH, span, n, spec.mood_missing))
        return out


def _write_mbox(path: Path, messages: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for m in sorted(messages, key=lambda m: (m["when"], m["id"])):
            d: _Dev = m["dev"]
            addr = d.email.replace("dev", "Dev", 1)
            fh.write(f"From {addr} {m['when'].strftime('%a %b %d %H:%M:%S %Y')}\n")
            fh.write(f"From: {d.name} <{addr}>\n")
            fh.write(f"Date: {format_datetime(m['when'])}\n")
            fh.write(f"Message-ID: <{m['id']}>\n")
            if m["parent"]:
                fh.write(f"In-Reply-To: <{m['parent']}>\n")
                fh.write(f"References: <{m['parent']}>\n")
            fh.write("Subject: synthetic discussion\n\nsee the issue tracker\n\n")


def _write_sentences(path: Path, sentences: list[SentenceRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SENTENCE_COLUMNS)
        for s in sentences:
            w.writerow([
                s.project, s.developer, s.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                s.valence, s.arousal, s.dominance, s.sad, s.anger, s.love, s.joy,
                s.sentiment_strength, s.polite, "" if s.mood is None else int(s.mood), s.modality,
            ])


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int, out_dir) -> dict:
    """Write commit logs, mailboxes and sentence files for every project.

    Returns a run configuration (also written as ``config.json``) and writes
    the planted ground truth to ``planted.json``.
    """
    spec.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    projects, planted = [], {}
    for p in range(spec.projects):
        name = f"p{p + 1}"
        builder = _ProjectBuilder(spec, name, rng)
        devs = builder.build()
        sentences = builder.sentences(devs)
        pdir = out / name
        pdir.mkdir(exist_ok=True)
        with open(pdir / "commits.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for c in sorted(builder.commits, key=lambda c: c["id"]):
                fh.write(json.dumps(c, sort_keys=True) + "\n")
        _write_mbox(pdir / "mail.mbox", builder.messages)
        _write_sentences(pdir / "sentences.csv", sentences)
        projects.append({
            "name": name,
            "commits": f"{name}/commits.jsonl",
            "mailbox": f"{name}/mail.mbox",
            "sentences": f"{name}/sentences.csv",
        })
        planted[name] = builder.planted
    config = {"projects": projects, "window_days": spec.window_days, "seed": seed}
    (out / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out / "planted.json").write_text(
        json.dumps({"spec": asdict(spec), "projects": planted}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return config
