"""Community smell detectors and per-developer label derivation."""

from __future__ import annotations

import csv
import enum
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graphs import CommunityPartition, SocioGraph, detect_communities


class SmellKind(enum.Enum):
    ORGANIZATIONAL_SILO = "OrganizationalSilo"
    LONE_WOLF = "LoneWolf"
    BOTTLENECK = "Bottleneck"


@dataclass(frozen=True)
class SmellAssignment:
    window: int
    developer: int
    smells: frozenset[SmellKind]

    def __post_init__(self):
        if SmellKind.ORGANIZATIONAL_SILO in self.smells and SmellKind.LONE_WOLF not in self.smells:
            raise ValueError("an organizational silo is always a lone wolf")


@dataclass(frozen=True)
class DeveloperLabels:
    developer: int
    project: str
    silo: int
    lone_wolf: int
    bottleneck: int
    smelly_developer: int
    smelly_quitter: int


LABEL_FIELDS = ("silo", "lone_wolf", "bottleneck", "smelly_developer", "smelly_quitter")


def detect_organizational_silo(collab: SocioGraph, comm: SocioGraph) -> set[int]:
    """Endpoints of collaboration edges whose developers are disconnected in
    the communication graph. Silent developers count as isolated vertices."""
    component = comm.components()
    found: set[int] = set()
    for u, v in collab.edges:
        cu, cv = component.get(u, ("isolated", u)), component.get(v, ("isolated", v))
        if cu != cv:
            found.update((u, v))
    return found


def detect_lone_wolf(collab: SocioGraph, comm: SocioGraph) -> set[int]:
    """Endpoints of collaboration edges without a direct communication edge."""
    found: set[int] = set()
    for u, v in collab.edges:
        if not comm.has_edge(u, v):
            found.update((u, v))
    return found


def detect_bottleneck(comm: SocioGraph, partition: CommunityPartition) -> set[int]:
    """Unique boundary spanners.

    A vertex of community A is a bottleneck when, for some other community B,
    it is the only member of A adjacent to any member of B.
    """
    if set(partition.assignment) != set(comm.vertices):
        raise ValueError("partition does not cover exactly the communication graph vertices")
    spanners: dict[tuple[int, int], set[int]] = defaultdict(set)
    for u, v in comm.edges:
        cu, cv = partition.assignment[u], partition.assignment[v]
        if cu != cv:
            spanners[(cu, cv)].add(u)
            spanners[(cv, cu)].add(v)
    found: set[int] = set()
    for members in spanners.values():
        if len(members) == 1:
            found |= members
    return found


def detect_window_smells(
    window_index: int,
    collab: SocioGraph,
    comm: SocioGraph,
    partition: CommunityPartition | None = None,
) -> list[SmellAssignment]:
    """Run the three detectors on one window's graphs."""
    if partition is None:
        partition = detect_communities(comm)
    silo = detect_organizational_silo(collab, comm)
    wolf = detect_lone_wolf(collab, comm)
    neck = detect_bottleneck(comm, partition)
    assert silo <= wolf, "silo set must be a subset of the lone-wolf set"
    out = []
    for dev in sorted(silo | wolf | neck):
        kinds = set()
        if dev in silo:
            kinds.add(SmellKind.ORGANIZATIONAL_SILO)
        if dev in wolf:
            kinds.add(SmellKind.LONE_WOLF)
        if dev in neck:
            kinds.add(SmellKind.BOTTLENECK)
        out.append(SmellAssignment(window_index, dev, frozenset(kinds)))
    return out


def derive_labels(
    assignments: Iterable[SmellAssignment],
    activity: Sequence[set[int]],
    project: str,
    developers: Iterable[int] = (),
) -> list[DeveloperLabels]:
    """Collapse per-window smells into one label row per developer.

    ``activity[i]`` is the set of developers with at least one commit or
    message in window ``i``. A smelly quitter is smelly in some window and
    inactive in the next one.
    """
    by_window: dict[int, dict[int, frozenset[SmellKind]]] = defaultdict(dict)
    for a in assignments:
        if not 0 <= a.window < len(activity):
            raise ValueError(f"assignment window {a.window} outside the activity range")
        by_window[a.window][a.developer] = by_window[a.window].get(a.developer, frozenset()) | a.smells
    everyone = set(developers)
    for act in activity:
        everyone |= act
    for per_dev in by_window.values():
        everyone |= set(per_dev)

    flags: dict[int, set[SmellKind]] = defaultdict(set)
    quitters: set[int] = set()
    for i in range(len(activity)):
        for dev, kinds in by_window.get(i, {}).items():
            flags[dev] |= kinds
            if kinds and i + 1 < len(activity) and dev not in activity[i + 1]:
                quitters.add(dev)

    rows = []
    for dev in sorted(everyone):
        kinds = flags.get(dev, set())
        silo = int(SmellKind.ORGANIZATIONAL_SILO in kinds)
        wolf = int(SmellKind.LONE_WOLF in kinds)
        neck = int(SmellKind.BOTTLENECK in kinds)
        rows.append(
            DeveloperLabels(
                developer=dev,
                project=project,
                silo=silo,
                lone_wolf=wolf,
                bottleneck=neck,
                smelly_developer=int(bool(silo or wolf or neck)),
                smelly_quitter=int(dev in quitters),
            )
        )
    return rows


def smell_report_csv(assignments: Iterable[tuple[str, SmellAssignment]]) -> str:
    """CSV with columns project, window, developer, silo, lone_wolf, bottleneck."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["project", "window", "developer", "silo", "lone_wolf", "bottleneck"])
    for project, a in assignments:
        w.writerow([
            project,
            a.window,
            a.developer,
            int(SmellKind.ORGANIZATIONAL_SILO in a.smells),
            int(SmellKind.LONE_WOLF in a.smells),
            int(SmellKind.BOTTLENECK in a.smells),
        ])
    return buf.getvalue()


def labels_csv(labels: Iterable[DeveloperLabels]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["project", "developer", *LABEL_FIELDS])
    for lab in labels:
        w.writerow([lab.project, lab.developer, *(getattr(lab, f) for f in LABEL_FIELDS)])
    return buf.getvalue()


def read_labels_csv(text: str) -> list[DeveloperLabels]:
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append(
            DeveloperLabels(
                developer=int(r["developer"]),
                project=r["project"],
                **{f: int(r[f]) for f in LABEL_FIELDS},
            )
        )
    return rows
