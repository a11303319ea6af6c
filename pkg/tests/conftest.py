import warnings
from datetime import datetime, timedelta, timezone

import pytest

from commsmell.ingest import CommitRecord, Corpus, MessageRecord, Mood, SentenceRecord, resolve_identities

T0 = datetime(2012, 3, 5, tzinfo=timezone.utc)  # a Monday


def at(days=0.0, hours=0.0):
    return T0 + timedelta(days=days, hours=hours)


def commit(cid, who, days, files, tz=0, hours=12.0):
    return CommitRecord(cid, who.title(), f"{who}@x.org", at(days, hours), frozenset(files), tz)


def message(mid, who, days, reply=None, thread=None):
    return MessageRecord(mid, reply, who.title(), f"{who}@x.org", at(days), thread)


def sentence(who, days=0.0, project="p", strength=0.0, polite=0, mood=Mood.INDICATIVE,
             vad=(1.0, 1.0, 1.0), flags=(0, 0, 0, 0), modality=0.0):
    return SentenceRecord(project, f"{who}@x.org", at(days), *vad, *flags, strength, polite, mood, modality)


def build(commits=(), messages=(), sentences=(), project="p"):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return resolve_identities(Corpus(project, list(commits), list(messages), list(sentences)))


def owner(corpus, who):
    email = f"{who}@x.org"
    return next(i.canonical_id for i in corpus.identities if email in i.emails)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


# -- acceptance reporting ------------------------------------------------------

_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.outcome != "passed"):
        number, title = marker.args
        detail = "; ".join(f"{k}={v}" for k, v in report.user_properties)
        status = "PASS" if report.passed else "FAIL"
        entry = _CRITERIA.setdefault(number, [title, "PASS", []])
        if status == "FAIL":
            entry[1] = "FAIL"
        if detail:
            entry[2].append(detail)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, details = _CRITERIA[number]
        suffix = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"{status} criterion {number}: {title}{suffix}")
