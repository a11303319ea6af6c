"""Analysis windows, collaboration/communication graphs and community detection."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from itertools import combinations
from typing import Iterable, Mapping

from .ingest import UNRESOLVED, Corpus

COLLABORATION = "collaboration"
COMMUNICATION = "communication"


@dataclass(frozen=True)
class AnalysisWindow:
    index: int
    start: datetime
    end: datetime
    partial: bool = False
    # the final window also owns the instant at its end
    closed: bool = False

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end or (self.closed and ts == self.end)


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SocioGraph:
    """Undirected weighted graph over canonical developer ids."""

    kind: str
    vertices: frozenset[int]
    edges: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        for (u, v), w in self.edges.items():
            if u >= v:
                raise ValueError(f"edge ({u}, {v}) is not canonically ordered or is a self-loop")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the vertex set")
            if w < 1:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")

    @classmethod
    def from_edges(cls, kind: str, vertices: Iterable[int], edges: Iterable[tuple[int, int]]):
        weights: dict[tuple[int, int], int] = defaultdict(int)
        for u, v in edges:
            if u != v:
                weights[_edge(u, v)] += 1
        vs = set(vertices)
        for u, v in weights:
            vs.update((u, v))
        return cls(kind, frozenset(vs), dict(sorted(weights.items())))

    def neighbors(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def components(self) -> dict[int, int]:
        """Map each vertex to the smallest vertex id of its connected component."""
        adj = self.neighbors()
        label: dict[int, int] = {}
        for root in sorted(self.vertices):
            if root in label:
                continue
            label[root] = root
            stack = [root]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in label:
                        label[y] = root
                        stack.append(y)
        return label


@dataclass(frozen=True)
class CommunityPartition:
    assignment: Mapping[int, int]
    kind: str = COMMUNICATION

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def members(self) -> list[set[int]]:
        groups: list[set[int]] = [set() for _ in range(self.n_communities)]
        for v, c in self.assignment.items():
            groups[c].add(v)
        return groups


def make_windows(corpus: Corpus, window_days: int = 90) -> list[AnalysisWindow]:
    """Tile [first commit, last activity] with consecutive fixed-length windows.

    The last window is flagged ``partial`` when the span is not a whole
    multiple of the window length.
    """
    if not corpus.commits:
        raise ValueError(f"{corpus.project}: cannot build windows without commits")
    if window_days <= 0:
        raise ValueError("window_days must be positive")
    first = min(c.timestamp for c in corpus.commits)
    last = max([c.timestamp for c in corpus.commits] + [m.timestamp for m in corpus.messages])
    length = timedelta(days=window_days)
    span = last - first
    n = max(1, math.ceil(span / length))
    partial = span % length != timedelta(0) or span == timedelta(0)
    return [
        AnalysisWindow(
            index=k,
            start=first + k * length,
            end=first + (k + 1) * length,
            partial=partial and k == n - 1,
            closed=k == n - 1,
        )
        for k in range(n)
    ]


def build_collaboration_graph(corpus: Corpus, window: AnalysisWindow) -> SocioGraph:
    """Link developers who modified at least one common file in the window.

    Edge weight is the number of distinct files both developers touched.
    """
    touched: dict[int, set[str]] = defaultdict(set)
    for commit, owner in zip(corpus.commits, corpus.commit_owners):
        if owner != UNRESOLVED and window.contains(commit.timestamp):
            touched[owner].update(commit.files)
    by_file: dict[str, list[int]] = defaultdict(list)
    for dev in sorted(touched):
        for f in touched[dev]:
            by_file[f].append(dev)
    weights: dict[tuple[int, int], int] = defaultdict(int)
    for devs in by_file.values():
        for u, v in combinations(devs, 2):
            weights[(u, v)] += 1
    return SocioGraph(COLLABORATION, frozenset(touched), dict(sorted(weights.items())))


def _thread_roots(corpus: Corpus) -> dict[str, str]:
    parent = {m.message_id: m.in_reply_to for m in corpus.messages}
    explicit = {m.message_id: m.thread_id for m in corpus.messages if m.thread_id}
    roots: dict[str, str] = {}
    for mid in parent:
        seen = [mid]
        cur = mid
        while parent.get(cur) in parent and parent[cur] not in seen:
            cur = parent[cur]
            seen.append(cur)
        roots[mid] = explicit.get(cur) or explicit.get(mid) or cur
    return roots


def build_communication_graph(
    corpus: Corpus, window: AnalysisWindow, mode: str = "reply"
) -> SocioGraph:
    """Link developers who replied to each other on the mailing list in the window.

    ``mode="co-thread"`` additionally links every pair of participants of a
    thread. Replies whose target is unknown or lies outside the window are
    ignored.
    """
    if mode not in ("reply", "co-thread"):
        raise ValueError(f"unknown communication mode {mode!r}")
    in_window = {
        m.message_id: owner
        for m, owner in zip(corpus.messages, corpus.message_owners)
        if window.contains(m.timestamp)
    }
    vertices = {o for o in in_window.values() if o != UNRESOLVED}
    weights: dict[tuple[int, int], int] = defaultdict(int)
    for m in corpus.messages:
        if m.message_id not in in_window or m.in_reply_to not in in_window:
            continue
        u, v = in_window[m.message_id], in_window[m.in_reply_to]
        if u != UNRESOLVED and v != UNRESOLVED and u != v:
            weights[_edge(u, v)] += 1
    if mode == "co-thread":
        roots = _thread_roots(corpus)
        threads: dict[str, set[int]] = defaultdict(set)
        for mid, owner in in_window.items():
            if owner != UNRESOLVED:
                threads[roots[mid]].add(owner)
        for participants in threads.values():
            for u, v in combinations(sorted(participants), 2):
                weights[(u, v)] += 1
    return SocioGraph(COMMUNICATION, frozenset(vertices), dict(sorted(weights.items())))


def modularity(graph: SocioGraph, partition: Mapping[int, int]) -> float:
    """Newman modularity of an unweighted partition (0 for edgeless graphs)."""
    m = len(graph.edges)
    if m == 0:
        return 0.0
    inside: dict[int, int] = defaultdict(int)
    degree: dict[int, int] = defaultdict(int)
    for u, v in graph.edges:
        degree[partition[u]] += 1
        degree[partition[v]] += 1
        if partition[u] == partition[v]:
            inside[partition[u]] += 1
    return sum(inside[c] / m - (degree[c] / (2 * m)) ** 2 for c in degree)


def detect_communities(graph: SocioGraph) -> CommunityPartition:
    """Greedy agglomerative modularity maximization on the unweighted graph.

    Starts from singletons and repeatedly merges the pair of adjacent
    communities with the largest modularity gain, until no merge improves
    modularity. Gains are compared in exact integer arithmetic; ties go to the
    pair with the smallest (min-id, min-id) label.
    """
    if not graph.vertices:
        return CommunityPartition({})
    m = len(graph.edges)
    # community label = its smallest member id
    label = {v: v for v in graph.vertices}
    degree: dict[int, int] = defaultdict(int)
    between: dict[int, dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for u, v in graph.edges:
        degree[u] += 1
        degree[v] += 1
        between[u][v] += 1
        between[v][u] += 1
    while m:
        best = None
        for a in sorted(between):
            for b in sorted(between[a]):
                if b <= a:
                    continue
                # scaled modularity gain: 2m^2 * dQ = 2m*L_ab - d_a*d_b
                gain = 2 * m * between[a][b] - degree[a] * degree[b]
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, a, b)
        if best is None:
            break
        _, a, b = best
        for c, k in between.pop(b).items():
            del between[c][b]
            if c != a:
                between[a][c] += k
                between[c][a] += k
        between[a].pop(a, None)
        degree[a] += degree.pop(b)
        for v, lab in label.items():
            if lab == b:
                label[v] = a
    order = {lab: i for i, lab in enumerate(sorted(set(label.values())))}
    return CommunityPartition({v: order[label[v]] for v in sorted(graph.vertices)})


def edge_list_lines(graph: SocioGraph, window_index: int) -> list[str]:
    """Lines of the ``kind window u v weight`` dump format."""
    return [f"{graph.kind} {window_index} {u} {v} {w}" for (u, v), w in sorted(graph.edges.items())]


def window_summary(
    window: AnalysisWindow,
    collab: SocioGraph,
    comm: SocioGraph,
    partition: CommunityPartition,
) -> dict:
    return {
        "window": window.index,
        "start": window.start.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "end": window.end.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "partial": window.partial,
        "collaboration": {"vertices": len(collab.vertices), "edges": len(collab.edges)},
        "communication": {
            "vertices": len(comm.vertices),
            "edges": len(comm.edges),
            "communities": partition.n_communities,
        },
    }


def dumps_window_summaries(summaries: list[dict]) -> str:
    return json.dumps(summaries, indent=2, sort_keys=True)
