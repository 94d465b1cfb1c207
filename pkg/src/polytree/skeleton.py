"""Maximum-weight spanning tree over pairwise mutual information."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .exceptions import InputError
from .info import mutual_information
from .model import as_source, pair_marginal


@dataclass(frozen=True)
class WeightedEdgeSet:
    """Branch weights (bits) for every unordered pair ``i < j``."""

    n: int
    entries: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if len(self.entries) != self.n * (self.n - 1) // 2:
            raise InputError(
                f"expected {self.n * (self.n - 1) // 2} weights for n={self.n}, "
                f"got {len(self.entries)}"
            )
        seen = set()
        for i, j, w in self.entries:
            if not 0 <= i < j < self.n or (i, j) in seen:
                raise InputError(f"bad or duplicate pair ({i}, {j})")
            if w < 0:
                raise InputError(f"negative weight {w} on ({i}, {j})")
            seen.add((i, j))
        object.__setattr__(self, "_lookup", {(i, j): w for i, j, w in self.entries})

    @classmethod
    def from_dict(cls, n: int, weights: dict) -> WeightedEdgeSet:
        entries = tuple((min(i, j), max(i, j), float(w)) for (i, j), w in weights.items())
        return cls(n, tuple(sorted(entries)))

    def weight(self, i: int, j: int) -> float:
        return self._lookup[(min(i, j), max(i, j))]


@dataclass(frozen=True)
class Skeleton:
    """Undirected spanning tree with the ties met while building it."""

    n: int
    edges: frozenset
    tie_report: list = field(default_factory=list, compare=False)
    warnings: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        edges = frozenset((min(u, v), max(u, v)) for u, v in self.edges)
        if len(edges) != self.n - 1:
            raise InputError(f"a skeleton over {self.n} nodes needs {self.n - 1} edges")
        uf = _UnionFind(self.n)
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v or not uf.union(u, v):
                raise InputError(f"edge set is not a spanning tree: {sorted(edges)}")
        object.__setattr__(self, "edges", edges)

    def neighbors(self, i: int) -> list[int]:
        return sorted({v for u, v in self.edges if u == i} | {u for u, v in self.edges if v == i})

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[max(ri, rj)] = min(ri, rj)
        return True


def compute_weights(src) -> WeightedEdgeSet:
    """Mutual information of every variable pair of a distribution source."""
    src = as_source(src)
    if src.n < 2:
        raise InputError("need at least two variables to compute branch weights")
    entries = tuple(
        (i, j, mutual_information(pair_marginal(src, i, j)))
        for i, j in itertools.combinations(range(src.n), 2)
    )
    return WeightedEdgeSet(src.n, entries)


def _tie_groups(ordered, tol):
    group = []
    for e in ordered:
        if group and group[0][2] - e[2] > tol:
            yield group
            group = []
        group.append(e)
    if group:
        yield group


def mwst(w: WeightedEdgeSet, tie_tolerance: float = 1e-9) -> Skeleton:
    """Kruskal-style greedy maximum-weight spanning tree.

    Edges are visited by descending weight, ties broken by ``(i, j)``.  A
    run of edges whose weights lie within ``tie_tolerance`` of the run's
    first weight is reported in ``tie_report`` when the tree actually
    depends on the order inside the run, i.e. when those edges close a loop
    among themselves given the branches chosen before the run.
    """
    if w.n < 2:
        raise InputError("mwst needs at least two variables")
    ordered = sorted(w.entries, key=lambda e: (-e[2], e[0], e[1]))
    uf = _UnionFind(w.n)
    chosen: list[tuple[int, int]] = []
    ties = []
    for group in _tie_groups(ordered, tie_tolerance):
        live = [(i, j) for i, j, _ in group if uf.find(i) != uf.find(j)]
        if len(live) > 1:
            local = _UnionFind(w.n)
            if not all(local.union(uf.find(i), uf.find(j)) for i, j in live):
                ties.append(live)
        for i, j, _ in group:
            if len(chosen) == w.n - 1:
                break
            if uf.union(i, j):
                chosen.append((i, j))
    warnings = [
        f"selected branch ({i}, {j}) has zero weight ({w.weight(i, j):.3g} bits); "
        "the distribution is degenerate along it"
        for i, j in sorted(chosen)
        if w.weight(i, j) <= tie_tolerance
    ]
    if ties:
        warnings.insert(
            0,
            "weight ties affected the spanning tree: "
            + "; ".join(", ".join(f"({i}, {j})" for i, j in g) for g in ties),
        )
    return Skeleton(w.n, frozenset(chosen), ties, warnings)


def tree_weight(w: WeightedEdgeSet, edges) -> float:
    return sum(w.weight(u, v) for u, v in edges)
