"""Parsers for commit logs, mailing-list archives and sentence-level sentiment
annotations, plus developer identity resolution across the three sources."""

from __future__ import annotations

import csv
import email.header
import email.utils
import enum
import json
import mailbox
import unicodedata
import warnings
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

UNRESOLVED = -1
UNRESOLVED_SENDER = "unresolved"


class IngestError(ValueError):
    """Raised when an input file cannot be parsed."""


class DataWarning(UserWarning):
    """Emitted for recoverable input problems (skipped rows, dropped messages)."""


class Mood(enum.IntEnum):
    INDICATIVE = 0
    IMPERATIVE = 1
    CONDITIONAL = 2
    SUBJUNCTIVE = 3


@dataclass(frozen=True)
class CommitRecord:
    commit_id: str
    author_name: str
    author_email: str
    timestamp: datetime
    files: frozenset[str]
    tz_offset_minutes: int = 0

    @property
    def local_time(self) -> datetime:
        return self.timestamp + timedelta(minutes=self.tz_offset_minutes)


@dataclass(frozen=True)
class MessageRecord:
    message_id: str
    in_reply_to: str | None
    sender_name: str
    sender_email: str
    timestamp: datetime
    thread_id: str | None = None


@dataclass(frozen=True)
class SentenceRecord:
    project: str
    developer: str
    timestamp: datetime
    valence: float
    arousal: float
    dominance: float
    sad: int
    anger: int
    love: int
    joy: int
    sentiment_strength: float
    polite: int
    mood: Mood | None
    modality: float


@dataclass(frozen=True)
class DeveloperIdentity:
    canonical_id: int
    emails: frozenset[str]
    names: frozenset[str]
    project: str


@dataclass
class Corpus:
    """All records of one project.

    After :func:`resolve_identities`, ``commit_owners``, ``message_owners`` and
    ``sentence_owners`` hold one canonical id per record (``UNRESOLVED`` for
    records that could not be attributed).
    """

    project: str
    commits: list[CommitRecord] = field(default_factory=list)
    messages: list[MessageRecord] = field(default_factory=list)
    sentences: list[SentenceRecord] = field(default_factory=list)
    identities: list[DeveloperIdentity] = field(default_factory=list)
    commit_owners: list[int] = field(default_factory=list)
    message_owners: list[int] = field(default_factory=list)
    sentence_owners: list[int] = field(default_factory=list)

    @property
    def resolved(self) -> bool:
        return len(self.commit_owners) == len(self.commits) and len(
            self.message_owners
        ) == len(self.messages) and len(self.sentence_owners) == len(self.sentences)

    def unresolved_counts(self) -> dict[str, int]:
        return {
            "commits": self.commit_owners.count(UNRESOLVED),
            "messages": self.message_owners.count(UNRESOLVED),
            "sentences": self.sentence_owners.count(UNRESOLVED),
        }

    def identity(self, canonical_id: int) -> DeveloperIdentity:
        return self.identities[canonical_id]


def _utc(value: str, where: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value.strip().replace("Z", "+00:00"))
    except (AttributeError, ValueError) as exc:
        raise IngestError(f"{where}: bad timestamp {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _offset_minutes(value: str) -> int:
    ts = datetime.fromisoformat(value.strip().replace("Z", "+00:00"))
    off = ts.utcoffset()
    return 0 if off is None else int(off.total_seconds() // 60)


def normalize_name(name: str) -> str:
    return unicodedata.normalize("NFC", " ".join(name.split())).casefold()


def _strip_id(value: str) -> str:
    return value.strip().strip("<>").strip()


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}, line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise IngestError(f"{path}, line {lineno}: expected a JSON object")
            yield lineno, obj


def parse_commit_log(path) -> list[CommitRecord]:
    """Read a JSON-Lines commit export.

    Each line: ``{"id", "name", "email", "ts", "tz_offset_minutes", "files"}``.
    ``tz_offset_minutes`` falls back to the offset carried by ``ts``.
    """
    path = Path(path)
    records = []
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}, line {lineno}"
        try:
            commit_id = str(obj["id"])
            email_addr = str(obj["email"]).strip().lower()
            ts_raw = obj["ts"]
            files = obj["files"]
        except KeyError as exc:
            raise IngestError(f"{where}: missing field {exc.args[0]!r}") from None
        if not email_addr:
            raise IngestError(f"{where}: empty author email")
        if not isinstance(files, list) or not files:
            raise IngestError(f"{where}: 'files' must be a non-empty list")
        ts = _utc(ts_raw, where)
        tz = obj.get("tz_offset_minutes")
        if tz is None:
            tz = _offset_minutes(ts_raw)
        records.append(
            CommitRecord(
                commit_id=commit_id,
                author_name=str(obj.get("name", "")),
                author_email=email_addr,
                timestamp=ts,
                files=frozenset(str(f) for f in files),
                tz_offset_minutes=int(tz),
            )
        )
    if not records:
        warnings.warn(f"{path}: commit log is empty", DataWarning, stacklevel=2)
    return records


def _decode_header(raw) -> str:
    if raw is None:
        return ""
    parts = []
    for chunk, charset in email.header.decode_header(str(raw)):
        if isinstance(chunk, bytes):
            chunk = chunk.decode(charset or "ascii")
        parts.append(chunk)
    return "".join(parts)


def _reply_target(in_reply_to: str | None, references: str | None) -> str | None:
    if in_reply_to and in_reply_to.strip():
        return _strip_id(in_reply_to.split()[0])
    if references and references.strip():
        return _strip_id(references.split()[0])
    return None


def _message_from_fields(
    where: str,
    message_id: str | None,
    in_reply_to: str | None,
    references: str | None,
    sender: tuple[str, str],
    date: datetime | None,
    thread_id: str | None,
) -> MessageRecord | None:
    if date is None:
        warnings.warn(f"{where}: missing or unparseable Date, message dropped", DataWarning, stacklevel=3)
        return None
    if not message_id:
        warnings.warn(f"{where}: missing Message-ID, message dropped", DataWarning, stacklevel=3)
        return None
    parent = _reply_target(in_reply_to, references)
    if parent == message_id:
        parent = None
    name, addr = sender
    if thread_id is None and references and references.strip():
        thread_id = _strip_id(references.split()[0])
    return MessageRecord(
        message_id=message_id,
        in_reply_to=parent,
        sender_name=name,
        sender_email=addr.strip().lower(),
        timestamp=date,
        thread_id=thread_id,
    )


def _parse_mbox(path: Path) -> list[MessageRecord]:
    records = []
    box = mailbox.mbox(path, create=False)
    try:
        for idx, msg in enumerate(box):
            where = f"{path}:message {idx}"
            try:
                raw_from = _decode_header(msg.get("From"))
                name, addr = email.utils.parseaddr(raw_from)
                sender = (name, addr)
            except (LookupError, UnicodeDecodeError):
                warnings.warn(f"{where}: undecodable From header", DataWarning, stacklevel=2)
                sender = (UNRESOLVED_SENDER, "")
            date = None
            if msg.get("Date"):
                try:
                    date = email.utils.parsedate_to_datetime(str(msg["Date"]))
                except (TypeError, ValueError):
                    date = None
                if date is not None:
                    if date.tzinfo is None:
                        date = date.replace(tzinfo=timezone.utc)
                    date = date.astimezone(timezone.utc)
            mid = _strip_id(str(msg.get("Message-ID", ""))) or None
            rec = _message_from_fields(
                where, mid, msg.get("In-Reply-To"), msg.get("References"), sender, date, None
            )
            if rec is not None:
                records.append(rec)
    finally:
        box.close()
    return records


def _parse_mail_jsonl(path: Path) -> list[MessageRecord]:
    records = []
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}, line {lineno}"
        date = _utc(obj["ts"], where) if obj.get("ts") else None
        mid = _strip_id(str(obj.get("id", ""))) or None
        refs = obj.get("references")
        if isinstance(refs, list):
            refs = " ".join(refs)
        rec = _message_from_fields(
            where,
            mid,
            obj.get("in_reply_to"),
            refs,
            (str(obj.get("name", "")), str(obj.get("email", ""))),
            date,
            obj.get("thread_id"),
        )
        if rec is not None:
            records.append(rec)
    return records


def _looks_like_jsonl(path: Path) -> bool:
    if path.suffix.lower() in {".jsonl", ".json", ".ndjson"}:
        return True
    with open(path, "rb") as fh:
        head = fh.read(256).lstrip()
    return head.startswith(b"{")


def parse_mailbox(path) -> list[MessageRecord]:
    """Read an mbox archive (or its JSON-Lines equivalent) into message records.

    The reply target comes from In-Reply-To, else the first References entry.
    Duplicate Message-IDs keep the first occurrence.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path}: no such file")
    records = _parse_mail_jsonl(path) if _looks_like_jsonl(path) else _parse_mbox(path)
    seen: set[str] = set()
    unique = []
    for rec in records:
        if rec.message_id in seen:
            warnings.warn(f"{path}: duplicate Message-ID {rec.message_id!r} ignored", DataWarning, stacklevel=2)
            continue
        seen.add(rec.message_id)
        unique.append(rec)
    return unique


SENTENCE_COLUMNS = (
    "project", "developer", "ts", "valence", "arousal", "dominance",
    "sad", "anger", "love", "joy", "sentiment", "polite", "mood", "modality",
)


def _binary(value, name: str) -> int:
    v = float(value)
    if v not in (0.0, 1.0):
        raise ValueError(f"{name} must be 0 or 1, got {value!r}")
    return int(v)


def _bounded(value, name: str, lo: float = -1.0, hi: float = 1.0) -> float:
    v = float(value)
    if not lo <= v <= hi:
        raise ValueError(f"{name}={v} outside [{lo}, {hi}]")
    return v


def _finite(value, name: str) -> float:
    v = float(value)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError(f"{name} is not finite")
    return v


def _sentence_from_row(row: dict) -> SentenceRecord:
    mood_raw = row.get("mood")
    if mood_raw is None or str(mood_raw).strip() == "":
        mood = None
    else:
        code = float(mood_raw)
        if code not in (0.0, 1.0, 2.0, 3.0):
            raise ValueError(f"unknown mood code {mood_raw!r}")
        mood = Mood(int(code))
    developer = str(row["developer"]).strip()
    if not developer:
        raise ValueError("empty developer")
    return SentenceRecord(
        project=str(row["project"]),
        developer=developer,
        timestamp=_utc(str(row["ts"]), "sentence"),
        valence=_finite(row["valence"], "valence"),
        arousal=_finite(row["arousal"], "arousal"),
        dominance=_finite(row["dominance"], "dominance"),
        sad=_binary(row["sad"], "sad"),
        anger=_binary(row["anger"], "anger"),
        love=_binary(row["love"], "love"),
        joy=_binary(row["joy"], "joy"),
        sentiment_strength=_bounded(row["sentiment"], "sentiment"),
        polite=_binary(row["polite"], "polite"),
        mood=mood,
        modality=_bounded(row["modality"], "modality"),
    )


def _iter_csv(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(SENTENCE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise IngestError(f"{path}: missing columns {sorted(missing)}")
        # header is line 1
        for i, row in enumerate(reader):
            yield i + 2, row


def parse_sentiment_sentences(path) -> list[SentenceRecord]:
    """Read pre-annotated sentences from CSV (with header) or JSON-Lines.

    Invalid rows are rejected with a :class:`DataWarning` naming the row.
    """
    path = Path(path)
    rows = _iter_jsonl(path) if _looks_like_jsonl(path) else _iter_csv(path)
    records = []
    for rowno, row in rows:
        try:
            records.append(_sentence_from_row(row))
        except (KeyError, ValueError, TypeError, IngestError) as exc:
            warnings.warn(f"{path}: row {rowno} rejected: {exc}", DataWarning, stacklevel=2)
    return records


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, key: str) -> None:
        self.parent.setdefault(key, key)

    def find(self, key: str) -> str:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _keys(name: str, addr: str) -> list[str]:
    keys = []
    addr = addr.strip().lower()
    if addr and "@" in addr:
        keys.append("e:" + addr)
    norm = normalize_name(name)
    if norm and norm != UNRESOLVED_SENDER:
        keys.append("n:" + norm)
    return keys


def _sentence_keys(dev: str) -> list[str]:
    dev = dev.strip()
    if "@" in dev and " " not in dev:
        return _keys("", dev)
    return _keys(dev, "")


def resolve_identities(corpus: Corpus) -> Corpus:
    """Merge developers by exact lowercase e-mail, then by normalized name.

    Returns a new corpus with records sorted by timestamp, identities numbered
    deterministically, and per-record owner lists filled in.
    """
    commits = sorted(corpus.commits, key=lambda c: (c.timestamp, c.commit_id))
    messages = sorted(corpus.messages, key=lambda m: (m.timestamp, m.message_id))
    sentences = sorted(
        corpus.sentences, key=lambda s: (s.timestamp, s.developer, s.sentiment_strength)
    )
    record_keys = (
        [_keys(c.author_name, c.author_email) for c in commits],
        [_keys(m.sender_name, m.sender_email) for m in messages],
        [_sentence_keys(s.developer) for s in sentences],
    )
    uf = _UnionFind()
    for group in record_keys:
        for keys in group:
            for k in keys:
                uf.add(k)
            for k in keys[1:]:
                uf.union(keys[0], k)

    members: dict[str, set[str]] = {}
    for key in uf.parent:
        members.setdefault(uf.find(key), set()).add(key)
    # numbering order is the smallest key of each component: input-order independent
    roots = sorted(members, key=lambda r: min(members[r]))
    root_to_id = {r: i for i, r in enumerate(roots)}
    identities = [
        DeveloperIdentity(
            canonical_id=i,
            emails=frozenset(k[2:] for k in members[r] if k.startswith("e:")),
            names=frozenset(k[2:] for k in members[r] if k.startswith("n:")),
            project=corpus.project,
        )
        for i, r in enumerate(roots)
    ]

    def owners(group: Sequence[list[str]]) -> list[int]:
        return [root_to_id[uf.find(keys[0])] if keys else UNRESOLVED for keys in group]

    out = replace(
        corpus,
        commits=commits,
        messages=messages,
        sentences=sentences,
        identities=identities,
        commit_owners=owners(record_keys[0]),
        message_owners=owners(record_keys[1]),
        sentence_owners=owners(record_keys[2]),
    )
    lost = out.unresolved_counts()
    if any(lost.values()):
        warnings.warn(f"{corpus.project}: unresolved records {lost}", DataWarning, stacklevel=2)
    return out


def load_corpus(project: str, commits_path, mailbox_path, sentences_path) -> Corpus:
    """Parse the three sources of one project and resolve identities."""
    sentences = [s for s in parse_sentiment_sentences(sentences_path) if s.project == project]
    return resolve_identities(
        Corpus(
            project=project,
            commits=parse_commit_log(commits_path),
            messages=parse_mailbox(mailbox_path),
            sentences=sentences,
        )
    )


# -- serialization ---------------------------------------------------------

def _ts(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "project": corpus.project,
        "identities": [
            {
                "id": i.canonical_id,
                "emails": sorted(i.emails),
                "names": sorted(i.names),
            }
            for i in corpus.identities
        ],
        "commits": [
            {
                "id": c.commit_id,
                "name": c.author_name,
                "email": c.author_email,
                "ts": _ts(c.timestamp),
                "tz_offset_minutes": c.tz_offset_minutes,
                "files": sorted(c.files),
                "owner": o,
            }
            for c, o in zip(corpus.commits, corpus.commit_owners)
        ],
        "messages": [
            {
                "id": m.message_id,
                "in_reply_to": m.in_reply_to,
                "name": m.sender_name,
                "email": m.sender_email,
                "ts": _ts(m.timestamp),
                "thread_id": m.thread_id,
                "owner": o,
            }
            for m, o in zip(corpus.messages, corpus.message_owners)
        ],
        "sentences": [
            {
                "developer": s.developer,
                "ts": _ts(s.timestamp),
                "valence": s.valence,
                "arousal": s.arousal,
                "dominance": s.dominance,
                "sad": s.sad,
                "anger": s.anger,
                "love": s.love,
                "joy": s.joy,
                "sentiment": s.sentiment_strength,
                "polite": s.polite,
                "mood": None if s.mood is None else int(s.mood),
                "modality": s.modality,
                "owner": o,
            }
            for s, o in zip(corpus.sentences, corpus.sentence_owners)
        ],
    }


def corpus_from_dict(data: dict) -> Corpus:
    project = data["project"]
    commits = [
        CommitRecord(
            commit_id=c["id"],
            author_name=c["name"],
            author_email=c["email"],
            timestamp=_utc(c["ts"], "corpus"),
            files=frozenset(c["files"]),
            tz_offset_minutes=c["tz_offset_minutes"],
        )
        for c in data["commits"]
    ]
    messages = [
        MessageRecord(
            message_id=m["id"],
            in_reply_to=m["in_reply_to"],
            sender_name=m["name"],
            sender_email=m["email"],
            timestamp=_utc(m["ts"], "corpus"),
            thread_id=m["thread_id"],
        )
        for m in data["messages"]
    ]
    sentences = [
        SentenceRecord(
            project=project,
            developer=s["developer"],
            timestamp=_utc(s["ts"], "corpus"),
            valence=s["valence"],
            arousal=s["arousal"],
            dominance=s["dominance"],
            sad=s["sad"],
            anger=s["anger"],
            love=s["love"],
            joy=s["joy"],
            sentiment_strength=s["sentiment"],
            polite=s["polite"],
            mood=None if s["mood"] is None else Mood(s["mood"]),
            modality=s["modality"],
        )
        for s in data["sentences"]
    ]
    identities = [
        DeveloperIdentity(i["id"], frozenset(i["emails"]), frozenset(i["names"]), project)
        for i in data["identities"]
    ]
    return Corpus(
        project=project,
        commits=commits,
        messages=messages,
        sentences=sentences,
        identities=identities,
        commit_owners=[c["owner"] for c in data["commits"]],
        message_owners=[m["owner"] for m in data["messages"]],
        sentence_owners=[s["owner"] for s in data["sentences"]],
    )


def dumps_corpus(corpus: Corpus) -> str:
    return json.dumps(corpus_to_dict(corpus), sort_keys=True, ensure_ascii=False)
