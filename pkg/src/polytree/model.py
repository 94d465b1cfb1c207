"""Generating poly-trees, distribution sources and exact/empirical marginals."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exceptions import DegeneracyError, InputError
from .info import (
    PairTable,
    TripleTable,
    conditional_mutual_information,
    mutual_information,
)

_CPT_TOL = 1e-12
_EXPLICIT_TOL = 1e-9


@dataclass(frozen=True)
class VariableSpec:
    name: str
    cardinality: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InputError(f"variable name must be a non-empty string, got {self.name!r}")
        if int(self.cardinality) != self.cardinality or self.cardinality < 2:
            raise InputError(
                f"variable {self.name!r}: cardinality must be an integer >= 2, "
                f"got {self.cardinality!r}"
            )
        object.__setattr__(self, "cardinality", int(self.cardinality))


def _as_variables(variables) -> tuple[VariableSpec, ...]:
    out = []
    for v in variables:
        out.append(v if isinstance(v, VariableSpec) else VariableSpec(*v))
    names = [v.name for v in out]
    if len(set(names)) != len(names):
        raise InputError(f"variable names must be unique: {names}")
    return tuple(out)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class _VariableMixin:
    variables: tuple[VariableSpec, ...]

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown variable {name!r}") from None


@dataclass(frozen=True, eq=False)
class Polytree(_VariableMixin):
    """A discrete poly-tree with one conditional probability table per node.

    ``cpts[i]`` has shape ``(*parent_cardinalities, cardinality_i)`` with the
    parents in the order given by ``parents[i]``; the last axis is the
    distribution of node ``i`` for one parent assignment.
    """

    variables: tuple[VariableSpec, ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        variables = _as_variables(self.variables)
        n = len(variables)
        if n < 1:
            raise InputError("a poly-tree needs at least one variable")
        if len(self.parents) != n or len(self.cpts) != n:
            raise InputError("parents and cpts must have one entry per variable")
        parents = []
        for i, ps in enumerate(self.parents):
            ps = tuple(int(p) for p in ps)
            if len(set(ps)) != len(ps) or any(p == i or not 0 <= p < n for p in ps):
                raise InputError(f"invalid parent list for {variables[i].name!r}: {ps}")
            parents.append(ps)
        cards = [v.cardinality for v in variables]
        cpts = []
        for i, (ps, cpt) in enumerate(zip(parents, self.cpts)):
            shape = tuple(cards[p] for p in ps) + (cards[i],)
            cpt = np.asarray(cpt, dtype=float)
            if cpt.size != int(np.prod(shape)):
                raise InputError(
                    f"CPT of {variables[i].name!r} has {cpt.size} entries, expected "
                    f"{int(np.prod(shape))}"
                )
            cpt = cpt.reshape(shape)
            if not np.all(np.isfinite(cpt)) or np.any(cpt < 0):
                raise InputError(f"CPT of {variables[i].name!r} has negative or non-finite entries")
            sums = cpt.sum(axis=-1)
            if np.any(np.abs(sums - 1.0) > _CPT_TOL):
                raise InputError(f"CPT columns of {variables[i].name!r} do not sum to 1")
            cpts.append(_frozen(cpt))
        n_edges = sum(len(ps) for ps in parents)
        if n_edges != n - 1:
            raise InputError(f"a poly-tree over {n} variables has {n - 1} edges, got {n_edges}")
        if not _connected(n, [(p, i) for i, ps in enumerate(parents) for p in ps]):
            raise InputError("the underlying undirected graph is not connected")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "parents", tuple(parents))
        object.__setattr__(self, "cpts", tuple(cpts))

    @classmethod
    def from_edges(cls, variables, edges, cpts) -> Polytree:
        """Build from ``(parent, child)`` index pairs; parents sorted by index."""
        variables = _as_variables(variables)
        parents = [[] for _ in variables]
        for u, v in edges:
            parents[v].append(u)
        return cls(variables, tuple(tuple(sorted(ps)) for ps in parents), tuple(cpts))

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Directed edges as ``(parent, child)``, sorted."""
        return sorted((p, i) for i, ps in enumerate(self.parents) for p in ps)

    @property
    def skeleton_edges(self) -> set[tuple[int, int]]:
        return {(min(u, v), max(u, v)) for u, v in self.edges}

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch = [[] for _ in range(self.n)]
        for p, c in self.edges:
            ch[p].append(c)
        return tuple(tuple(c) for c in ch)

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        ready = [i for i in range(self.n) if indeg[i] == 0]
        order = []
        while ready:
            i = ready.pop(0)
            order.append(i)
            for c in self.children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:  # pragma: no cover - excluded by the tree check
            raise InputError("directed graph has a cycle")
        return tuple(order)

    def joint_table(self) -> np.ndarray:
        """Full joint distribution as an array indexed by assignment."""
        return self._joint

    @cached_property
    def _joint(self) -> np.ndarray:
        cards = self.cardinalities
        joint = np.ones(cards)
        for i, (ps, cpt) in enumerate(zip(self.parents, self.cpts)):
            axes = list(ps) + [i]
            perm = np.argsort(axes)
            shape = [cards[k] if k in axes else 1 for k in range(self.n)]
            joint = joint * cpt.transpose(perm).reshape(shape)
        joint.flags.writeable = False
        return joint


def _connected(n, edges) -> bool:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _check_assignment(cards, a) -> tuple[int, ...]:
    a = tuple(int(x) for x in a)
    if len(a) != len(cards):
        raise InputError(f"assignment has {len(a)} values, expected {len(cards)}")
    for x, c in zip(a, cards):
        if not 0 <= x < c:
            raise InputError(f"assignment value {x} out of range [0, {c})")
    return a


def joint_probability(model: Polytree, a: Sequence[int]) -> float:
    """Product over nodes of P(x_i | parents(x_i)) for one full assignment."""
    a = _check_assignment(model.cardinalities, a)
    prob = 1.0
    for i, (ps, cpt) in enumerate(zip(model.parents, model.cpts)):
        prob *= cpt[tuple(a[p] for p in ps) + (a[i],)]
    return float(prob)


@dataclass(frozen=True, eq=False)
class Dataset(_VariableMixin):
    """Discrete records stored as distinct rows with multiplicities."""

    variables: tuple[VariableSpec, ...]
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        variables = _as_variables(self.variables)
        values = np.asarray(self.values, dtype=np.int64).reshape(-1, len(variables))
        counts = np.asarray(self.counts, dtype=np.int64).ravel()
        if len(values) != len(counts):
            raise InputError("values and counts differ in length")
        if np.any(counts < 0) or counts.sum() < 1:
            raise InputError("a dataset needs a positive total count")
        cards = np.array([v.cardinality for v in variables])
        if values.size and (np.any(values < 0) or np.any(values >= cards)):
            raise InputError("dataset values fall outside the variable cardinalities")
        values.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_rows(cls, variables, rows) -> Dataset:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise InputError("rows must be a non-empty 2-d array")
        values, counts = np.unique(rows, axis=0, return_counts=True)
        return cls(variables, values, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def rows(self) -> np.ndarray:
        """Expand back to one row per record, in lexicographic order."""
        return np.repeat(self.values, self.counts, axis=0)


class Factored(_VariableMixin):
    """Exact distribution given by a poly-tree factorization."""

    is_exact = True

    def __init__(self, model: Polytree):
        self.model = model
        self.variables = model.variables

    def joint_table(self) -> np.ndarray:
        return self.model.joint_table()


class Explicit(_VariableMixin):
    """Exact distribution given as a full table over all assignments."""

    is_exact = True

    def __init__(self, variables, table):
        self.variables = _as_variables(variables)
        table = np.asarray(table, dtype=float)
        cards = self.cardinalities
        if table.size != int(np.prod(cards)):
            raise InputError(
                f"explicit table has {table.size} entries, expected {int(np.prod(cards))}"
            )
        table = table.reshape(cards)
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise InputError("explicit table entries must be finite and non-negative")
        if abs(table.sum() - 1.0) > _EXPLICIT_TOL:
            raise InputError(f"explicit table sums to {table.sum()!r}, expected 1")
        self._table = _frozen(table)

    def joint_table(self) -> np.ndarray:
        return self._table


class Empirical(_VariableMixin):
    """Relative frequencies of a :class:`Dataset`."""

    is_exact = False

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.variables = dataset.variables

    @property
    def sample_count(self) -> int:
        return self.dataset.total

    def counts(self, indices: Sequence[int]) -> np.ndarray:
        idx = list(indices)
        shape = tuple(self.cardinalities[i] for i in idx)
        out = np.zeros(shape)
        np.add.at(out, tuple(self.dataset.values[:, i] for i in idx), self.dataset.counts)
        return out


def as_source(obj):
    """Wrap a Polytree or Dataset as a distribution source; pass sources through."""
    if isinstance(obj, Polytree):
        return Factored(obj)
    if isinstance(obj, Dataset):
        return Empirical(obj)
    if isinstance(obj, (Factored, Explicit, Empirical)):
        return obj
    raise InputError(f"cannot use {type(obj).__name__} as a distribution source")


def _check_indices(src, indices):
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise InputError(f"variable indices must be distinct, got {idx}")
    for i in idx:
        if not 0 <= i < src.n:
            raise InputError(f"variable index {i} out of range for {src.n} variables")
    return idx


def marginal(src, indices: Sequence[int]) -> np.ndarray:
    """Joint distribution of the listed variables, axes in the given order."""
    src = as_source(src)
    idx = _check_indices(src, indices)
    if isinstance(src, Empirical):
        c = src.counts(idx)
        return c / c.sum()
    if isinstance(src, Factored):
        return _ancestral_marginal(src.model, idx)
    return _sum_to(src.joint_table(), idx)


def _sum_to(joint, idx, axes_vars=None):
    axes_vars = list(range(joint.ndim)) if axes_vars is None else list(axes_vars)
    others = tuple(a for a, k in enumerate(axes_vars) if k not in idx)
    m = joint.sum(axis=others) if others else np.array(joint)
    kept = [k for k in axes_vars if k in idx]
    return np.transpose(m, [kept.index(i) for i in idx])


def _ancestral_marginal(model, idx):
    # nodes outside the ancestral closure are barren and sum out to 1
    closure = set(idx)
    stack = list(idx)
    while stack:
        for p in model.parents[stack.pop()]:
            if p not in closure:
                closure.add(p)
                stack.append(p)
    nodes = sorted(closure)
    pos = {k: a for a, k in enumerate(nodes)}
    cards = [model.cardinalities[k] for k in nodes]
    joint = np.ones(cards)
    for i in nodes:
        axes = [pos[p] for p in model.parents[i]] + [pos[i]]
        perm = np.argsort(axes)
        shape = [1] * len(nodes)
        for a in axes:
            shape[a] = cards[a]
        joint = joint * model.cpts[i].transpose(perm).reshape(shape)
    return _sum_to(joint, idx, nodes)


def pair_marginal(src, i: int, j: int) -> PairTable:
    if i == j:
        raise InputError("pair_marginal needs two distinct variables")
    return PairTable(marginal(src, (i, j)))


def triple_marginal(src, i: int, j: int, k: int) -> TripleTable:
    if len({i, j, k}) != 3:
        raise InputError("triple_marginal needs three distinct variables")
    return TripleTable(marginal(src, (i, j, k)))


def sample_array(model: Polytree, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` records by ancestral sampling; shape ``(n, model.n)``."""
    if int(n) != n or n < 1:
        raise InputError(f"sample count must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    out = np.empty((int(n), model.n), dtype=np.int64)
    for i in model.topological_order:
        ps = model.parents[i]
        probs = model.cpts[i][tuple(out[:, p] for p in ps)] if ps else model.cpts[i][None, :]
        cum = np.cumsum(probs, axis=-1)
        u = rng.random(int(n))[:, None]
        draws = (u >= cum).sum(axis=-1)
        # guard against cumulative sums ending a hair below 1
        out[:, i] = np.minimum(draws, model.cardinalities[i] - 1)
    return out


def sample(model: Polytree, n: int, seed: int) -> Dataset:
    return Dataset.from_rows(model.variables, sample_array(model, n, seed))


@dataclass
class NondegeneracyReport:
    """Outcome of :func:`check_nondegeneracy`.

    ``violations`` makes the check fail; ``ties`` are weight ties found by
    the spanning-tree construction and are reported separately.
    ``culprits`` lists the nodes taking part in a violated criterion.
    """

    floor: float
    violations: list[str] = field(default_factory=list)
    ties: list[list[tuple[int, int]]] = field(default_factory=list)
    culprits: set[int] = field(default_factory=set)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed


def check_nondegeneracy(model: Polytree, floor: float = 0.01, tie_tolerance: float = 1e-9):
    """Check the information criteria that make a poly-tree recoverable.

    Verified: every edge has I >= floor; every pair at distance two that
    does not meet head-to-head has I >= floor; every collider A -> B <- C has
    I(A, C | B) >= floor.  When these pass, the skeleton construction is run
    as well so that weight ties show up in the report.
    """
    from .skeleton import compute_weights, mwst

    src = Factored(model)
    names = model.names
    report = NondegeneracyReport(floor=floor)
    parents = [set(ps) for ps in model.parents]

    for u, v in sorted(model.skeleton_edges):
        w = mutual_information(pair_marginal(src, u, v))
        if w < floor:
            report.violations.append(f"edge {names[u]}-{names[v]}: I = {w:.6g} bits < {floor}")
            report.culprits.update((u, v))
    for b in range(model.n):
        nbrs = sorted(parents[b] | set(model.children[b]))
        for a, c in itertools.combinations(nbrs, 2):
            if a in parents[b] and c in parents[b]:
                cmi = conditional_mutual_information(triple_marginal(src, a, c, b))
                if cmi < floor:
                    report.violations.append(
                        f"collider {names[a]}->{names[b]}<-{names[c]}: "
                        f"I(A,C|B) = {cmi:.6g} bits < {floor}"
                    )
                    report.culprits.update((a, b, c))
            else:
                w = mutual_information(pair_marginal(src, a, c))
                if w < floor:
                    report.violations.append(
                        f"path {names[a]}-{names[b]}-{names[c]}: I = {w:.6g} bits < {floor}"
                    )
                    report.culprits.update((a, b, c))
    if model.n >= 2 and report.passed:
        report.ties = mwst(compute_weights(src), tie_tolerance).tie_report
        for group in report.ties:
            report.culprits.update(x for e in group for x in e)
    return report


def random_tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniformly random labelled tree on ``n`` nodes via a Pruefer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = list(rng.integers(0, n, size=n - 2))
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(k for k in range(n) if degree[k] == 1)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [k for k in range(n) if degree[k] == 1]
    edges.append((u, v))
    return sorted(edges)


def _orient_tree(n, edges, max_parents, rng):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    root = int(rng.integers(n))
    indeg = [0] * n
    directed = []
    seen = {root}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for v in sorted(adj[u]):
            if v in seen:
                continue
            seen.add(v)
            queue.append(v)
            # v has no arrows yet, so pointing u -> v is always allowed
            if indeg[u] < max_parents and rng.random() < 0.5:
                directed.append((v, u))
                indeg[u] += 1
            else:
                directed.append((u, v))
                indeg[v] += 1
    return directed


def _random_cpts(cards, parents, rng, concentration):
    cpts = []
    for i, ps in enumerate(parents):
        shape = tuple(cards[p] for p in ps) + (cards[i],)
        raw = rng.gamma(concentration, size=shape)
        cpts.append(raw / raw.sum(axis=-1, keepdims=True))
    return cpts


def random_polytree(
    n_vars: int,
    max_card: int = 2,
    max_parents: int = 3,
    strength_floor: float = 0.01,
    seed=None,
    *,
    min_card: int = 2,
    concentration: float = 0.3,
    max_tries: int = 200,
    repair_rounds: int = 100,
) -> Polytree:
    """Random poly-tree that passes :func:`check_nondegeneracy`.

    The skeleton is a uniformly random labelled tree; edges are oriented at
    random subject to ``max_parents``.  CPT columns are normalized gamma
    draws (i.e. Dirichlet(``concentration``)), so exact equalities between
    information measures occur with probability zero.  When the check fails
    (or shows weight ties), the CPTs of the implicated nodes are redrawn;
    after ``repair_rounds`` the whole model is drawn again.
    """
    if int(n_vars) != n_vars or n_vars < 1:
        raise InputError(f"n_vars must be >= 1, got {n_vars!r}")
    if max_card < min_card or min_card < 2:
        raise InputError("need 2 <= min_card <= max_card")
    if max_parents < 1:
        raise InputError("max_parents must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        cards = [int(c) for c in rng.integers(min_card, max_card + 1, size=n_vars)]
        variables = tuple(VariableSpec(f"X{i}", c) for i, c in enumerate(cards))
        directed = _orient_tree(n_vars, random_tree_edges(n_vars, rng), max_parents, rng)
        parents = tuple(tuple(sorted(u for u, v in directed if v == i)) for i in range(n_vars))
        cpts = _random_cpts(cards, parents, rng, concentration)
        for _ in range(repair_rounds):
            model = Polytree(variables, parents, tuple(cpts))
            report = check_nondegeneracy(model, strength_floor)
            if report.passed and not report.ties:
                return model
            fresh = _random_cpts(cards, parents, rng, concentration)
            for i in report.culprits or range(n_vars):
                cpts[i] = fresh[i]
    raise DegeneracyError(
        f"no non-degenerate poly-tree with floor {strength_floor} found in {max_tries} tries"
    )


def mutual_information_of(src, i: int, j: int) -> float:
    """Shorthand for ``mutual_information(pair_marginal(src, i, j))``."""
    return mutual_information(pair_marginal(src, i, j))
