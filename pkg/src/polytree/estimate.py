"""Completion of undetermined branches and CPT fitting."""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .model import Empirical, Polytree, as_source, marginal
from .orient import RecoveredStructure, default_oracle, independent


class ZeroMassWarning(UserWarning):
    """A parent configuration has no mass; its CPT column was set uniform."""


@dataclass(frozen=True)
class OrientationOverride:
    """User-supplied ``(parent, child)`` directions for undetermined branches."""

    assignments: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "assignments", tuple((int(u), int(v)) for u, v in self.assignments)
        )


@dataclass
class DirectedTree:
    n: int
    edges: list[tuple[int, int]]
    warnings: list[str] = field(default_factory=list)

    def parents(self, i: int) -> list[int]:
        return sorted(u for u, v in self.edges if v == i)


def _acyclic(n, edges) -> bool:
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for u, v in edges:
        indeg[v] += 1
        out[u].append(v)
    ready = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while ready:
        u = ready.pop()
        seen += 1
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return seen == n


def complete_orientation(
    rs: RecoveredStructure, ov=None, src=None, oracle=None
) -> DirectedTree:
    """Direct every branch of a recovered structure.

    Overrides are applied first.  An override that gives a node a second
    parent is checked against the data: the new parent must be judged
    independent of each existing parent, which needs ``src``.  Remaining
    undirected fragments are rooted at their lowest-index node (or, if a
    node of the fragment already has a parent, the lowest such node) and
    directed away from the root.
    """
    if ov is None:
        ov = OrientationOverride()
    elif not isinstance(ov, OrientationOverride):
        ov = OrientationOverride(tuple(ov))
    state = dict(rs.edge_states)
    names = None if src is None else as_source(src).names

    def label(i):
        return names[i] if names else str(i)

    overridden = []
    for u, v in ov.assignments:
        key = (min(u, v), max(u, v))
        if key not in state:
            raise InputError(f"override {label(u)}->{label(v)} is not a skeleton edge")
        if rs.edge_states[key] is not None:
            raise InputError(f"override {label(u)}->{label(v)} targets an edge that is already directed")
        if state[key] is not None and state[key] != (u, v):
            raise InputError(f"conflicting overrides for {label(u)}-{label(v)}")
        state[key] = (u, v)
        overridden.append((u, v))

    for u, v in overridden:
        others =[s[0] for s in state.values() if s is not None and s[1] == v and s[0] != u]
        if not others:
            continue
        if src is None:
            raise InputError(
                f"override {label(u)}->{label(v)} creates a collider; a distribution source "
                "is required to validate it"
            )
        orc = oracle or default_oracle(src)
        for p in others:
            if not independent(src, u, p, orc):
                raise InputError(
                    f"override {label(u)}->{label(v)} makes {label(u)} and {label(p)} co-parents "
                    f"of {label(v)}, but the data show them dependent"
                )

    notes = []
    remaining = [e for e, s in state.items() if s is None]
    adj = {}
    for u, v in remaining:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    has_parent = {s[1] for s in state.values() if s is not None}
    seen = set()
    for start in sorted(adj):
        if start in seen:
            continue
        frag = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in frag:
                    frag.add(w)
                    stack.append(w)
        seen |= frag
        with_parent = sorted(frag & has_parent)
        root = with_parent[0] if with_parent else min(frag)
        for extra in with_parent[1:]:
            notes.append(f"default completion gives node {label(extra)} an unverified extra parent")
        queue = deque([root])
        visited = {root}
        while queue:
            x = queue.popleft()
            for d in sorted(adj[x]):
                if d not in visited:
                    visited.add(d)
                    state[(min(x, d), max(x, d))] = (x, d)
                    queue.append(d)

    edges = sorted(state.values())
    if not _acyclic(rs.n, edges):
        raise InputError("orientation contains a directed cycle")
    return DirectedTree(rs.n, edges, notes)


def _edges_of(directed):
    if isinstance(directed, (DirectedTree, Polytree)):
        return list(directed.edges)
    return [(int(u), int(v)) for u, v in directed]


def fit_parameters(src, directed, smoothing: float = 0.0) -> Polytree:
    """Fit P(x_i | parents) for every node of a fully directed tree.

    Exact sources are marginalized directly.  Empirical sources use counts
    plus ``smoothing`` pseudo-counts per cell.  A parent configuration with
    no mass gets a uniform column and a :class:`ZeroMassWarning`.
    """
    src = as_source(src)
    if smoothing < 0:
        raise InputError("smoothing must be non-negative")
    edges = _edges_of(directed)
    n = src.n
    parents = [[] for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"edge ({u}, {v}) refers to unknown variables")
        parents[v].append(u)
    cpts = []
    for i in range(n):
        ps = sorted(parents[i])
        family = ps + [i]
        if isinstance(src, Empirical):
            table = src.counts(family) + smoothing
        else:
            table = np.array(marginal(src, family))
        mass = table.sum(axis=-1, keepdims=True)
        empty = mass[..., 0] <= 0
        if np.any(empty):
            warnings.warn(
                f"{int(empty.sum())} parent configuration(s) of {src.names[i]!r} have no mass; "
                "using uniform columns",
                ZeroMassWarning,
                stacklevel=2,
            )
        with np.errstate(invalid="ignore", divide="ignore"):
            cpt = np.where(mass > 0, table / np.where(mass > 0, mass, 1.0), 1.0 / table.shape[-1])
        cpts.append(cpt)
        parents[i] = ps
    return Polytree(src.variables, tuple(tuple(p) for p in parents), tuple(cpts))
