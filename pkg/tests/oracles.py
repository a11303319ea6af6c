"""Independent brute-force implementations used as test oracles."""

import itertools
import random
from fractions import Fraction

from commsmell.graphs import SocioGraph


def _adjacent(edges, u, v):
    return (u, v) in edges or (v, u) in edges


def _reachable(vertices, edges, src, dst):
    """Plain BFS over an edge-pair list, starting from scratch every time."""
    if src not in vertices or dst not in vertices:
        return src == dst
    seen, frontier = {src}, [src]
    while frontier:
        nxt = []
        for x in frontier:
            for a, b in edges:
                for p, q in ((a, b), (b, a)):
                    if p == x and q not in seen:
                        seen.add(q)
                        nxt.append(q)
        frontier = nxt
    return dst in seen


def silo_oracle(collab_edges, comm_vertices, comm_edges):
    out = set()
    for u, v in collab_edges:
        if not _reachable(comm_vertices, comm_edges, u, v):
            out |= {u, v}
    return out


def wolf_oracle(collab_edges, comm_edges):
    out = set()
    for u, v in collab_edges:
        if not _adjacent(comm_edges, u, v):
            out |= {u, v}
    return out


def bottleneck_oracle(comm_vertices, comm_edges, assignment):
    communities = sorted(set(assignment.values()))
    out = set()
    for a, b in itertools.permutations(communities, 2):
        side_a = [x for x in comm_vertices if assignment[x] == a]
        side_b = [y for y in comm_vertices if assignment[y] == b]
        spanners = [x for x in side_a if any(_adjacent(comm_edges, x, y) for y in side_b)]
        if len(spanners) == 1:
            out.add(spanners[0])
    return out


def random_graph_pair(rng: random.Random, max_vertices=12, p=0.3):
    """Collaboration graph on all n developers; communication graph on a random subset."""
    n = rng.randint(2, max_vertices)
    ids = rng.sample(range(100), n)
    collab_edges = [(u, v) for u, v in itertools.combinations(ids, 2) if rng.random() < p]
    comm_vertices = [v for v in ids if rng.random() < 0.85]
    comm_edges = [(u, v) for u, v in itertools.combinations(comm_vertices, 2) if rng.random() < p]
    collab = SocioGraph.from_edges("collaboration", ids, collab_edges)
    comm = SocioGraph.from_edges("communication", comm_vertices, comm_edges)
    return collab, comm, collab_edges, comm_vertices, comm_edges


def minimal_core_prefix(counts):
    """Smallest-size developer set reaching 80% of commits, by exhaustive subset search.

    Among minimum-size sets, the one taken by the descending-count, ascending-id
    order is returned.
    """
    total = sum(counts.values())
    devs = sorted(counts, key=lambda d: (-counts[d], d))
    for size in range(1, len(devs) + 1):
        for subset in itertools.combinations(devs, size):
            if 5 * sum(counts[d] for d in subset) >= 4 * total:
                return set(subset)
    return set()


# -- statistics -------------------------------------------------------------

def pairwise_delta(x, y):
    gt = sum(1 for a in x for b in y if a > b)
    lt = sum(1 for a in x for b in y if a < b)
    return Fraction(gt - lt, len(x) * len(y))


def midranks(values):
    order = sorted(values)
    return [Fraction(sum(i + 1 for i, v in enumerate(order) if v == x), order.count(x)) for x in values]


def enumerated_ranksum_p(x, y):
    """Two-sided p by listing every assignment of pooled ranks to the first sample."""
    pooled = list(x) + list(y)
    ranks = midranks(pooled)
    n, total = len(x), len(pooled)
    mean = Fraction(n * (total + 1), 2)
    observed = abs(sum(ranks[:n]) - mean)
    hits = count = 0
    for chosen in itertools.combinations(range(total), n):
        count += 1
        if abs(sum(ranks[i] for i in chosen) - mean) >= observed:
            hits += 1
    return hits / count
