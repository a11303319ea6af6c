"""Detecting community smells in a hand-built project.

Two teams talk on a mailing list. Carol is the only person on the first
team who ever writes to the second one. Frank edits core.py with Alice and
Bob but never posts, Dave co-edits io.py with Bob without replying to him,
and Carol co-edits the docs with Eve.
"""
import warnings
from datetime import datetime, timedelta, timezone

from commsmell import (
    build_collaboration_graph,
    build_communication_graph,
    detect_communities,
    detect_window_smells,
    make_windows,
    resolve_identities,
)
from commsmell.ingest import CommitRecord, Corpus, MessageRecord

t0 = datetime(2021, 1, 4, 12, tzinfo=timezone.utc)


def day(n):
    return t0 + timedelta(days=n)


def commit(cid, who, n, *files):
    return CommitRecord(cid, who, f"{who.lower()}@example.org", day(n), frozenset(files), 0)


def mail(mid, who, n, reply=None):
    return MessageRecord(mid, reply, who, f"{who.lower()}@example.org", day(n), None)


commits = [
    commit("c1", "Alice", 0, "core.py"),
    commit("c2", "Bob", 1, "core.py", "io.py"),
    commit("c3", "Dave", 2, "io.py"),
    commit("c4", "Frank", 3, "core.py"),
    commit("c5", "Eve", 4, "docs.rst"),
    commit("c6", "Carol", 5, "docs.rst"),
]
messages = [
    # team one: Alice, Bob, Carol
    mail("m1", "Alice", 1), mail("m2", "Bob", 1, "m1"), mail("m3", "Carol", 2, "m2"),
    mail("m4", "Alice", 2, "m3"),
    # team two: Dave, Eve, Grace
    mail("m5", "Dave", 3), mail("m6", "Eve", 3, "m5"), mail("m7", "Grace", 4, "m6"),
    mail("m8", "Dave", 4, "m7"),
    # the single bridge between them
    mail("m9", "Carol", 5, "m8"),
]

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    corpus = resolve_identities(Corpus("demo", commits, messages, []))
name = {i.canonical_id: sorted(i.names)[0].title() for i in corpus.identities}

(window,) = make_windows(corpus, window_days=90)
collab = build_collaboration_graph(corpus, window)
comm = build_communication_graph(corpus, window)
print("collaboration edges:", sorted((name[u], name[v]) for u, v in collab.edges))
print("communication edges:", sorted((name[u], name[v]) for u, v in comm.edges))

# communities come from greedy modularity on the communication graph
partition = detect_communities(comm)
for c, members in enumerate(partition.members()):
    print(f"community {c}:", sorted(name[v] for v in members))

for a in detect_window_smells(window.index, collab, comm, partition):
    kinds = ", ".join(sorted(k.value for k in a.smells))
    print(f"{name[a.developer]:>6}: {kinds}")

# Frank is absent from the communication graph, so each of his co-editing
# edges joins two disconnected developers: Alice, Bob and Frank are silos.
# Bob/Dave and Carol/Eve co-edit without a direct reply, so all four are
# lone wolves even though a path connects them.
# Carol and Dave are the only links between the two communities.
