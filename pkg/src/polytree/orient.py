"""Recovery of branch directions from marginal (in)dependence of neighbours."""
from __future__ import annotations

import enum
import itertools
import math
from collections import deque
from dataclasses import dataclass, field

from scipy.stats import chi2

from .exceptions import ConfigurationError, InputError
from .info import conditional_mutual_information, mutual_information
from .model import Empirical, as_source, pair_marginal, triple_marginal
from .skeleton import Skeleton


@dataclass(frozen=True)
class ExactThreshold:
    """Independent iff the information measure is below ``epsilon`` bits."""

    epsilon: float = 1e-9

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")

    def independent(self, bits, dof, src) -> bool:
        return bits < self.epsilon


@dataclass(frozen=True)
class FixedThreshold:
    """Like :class:`ExactThreshold`, meant for a hand-tuned cut on noisy data."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError("tau must be positive")

    def independent(self, bits, dof, src) -> bool:
        return bits < self.tau


@dataclass(frozen=True)
class GTest:
    """Likelihood-ratio test at significance ``alpha``.

    The statistic is G = 2 N ln(2) I, with I the plug-in estimate in bits,
    compared to the chi-square quantile at ``1 - alpha``.  ``sample_count``
    defaults to the record count of the empirical source.
    """

    alpha: float = 0.01
    sample_count: int | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.sample_count is not None and self.sample_count < 1:
            raise ConfigurationError("sample_count must be positive")

    def statistic(self, bits, src) -> float:
        if not isinstance(src, Empirical):
            raise ConfigurationError("the G-test oracle needs an empirical (sampled) source")
        n = self.sample_count if self.sample_count is not None else src.sample_count
        return 2.0 * n * math.log(2.0) * bits

    def independent(self, bits, dof, src) -> bool:
        g = self.statistic(bits, src)
        return g <= chi2.ppf(1.0 - self.alpha, max(dof, 1))


def default_oracle(src):
    src = as_source(src)
    return ExactThreshold() if src.is_exact else GTest()


class TripletType(enum.Enum):
    TYPE3 = "type3"
    TYPE12 = "type12"


class Role(enum.Enum):
    PARENT = "parent"
    CHILD = "child"


def _card(src, i):
    return src.cardinalities[i]


def independent(src, i: int, j: int, oracle=None) -> bool:
    """Does the oracle judge variables ``i`` and ``j`` marginally independent?"""
    src = as_source(src)
    oracle = oracle or default_oracle(src)
    if i == j:
        raise InputError("independence test needs two distinct variables")
    if isinstance(oracle, GTest) and not isinstance(src, Empirical):
        raise ConfigurationError("the G-test oracle needs an empirical (sampled) source")
    bits = mutual_information(pair_marginal(src, i, j))
    dof = (_card(src, i) - 1) * (_card(src, j) - 1)
    return oracle.independent(bits, dof, src)


def conditionally_independent(src, i: int, j: int, k: int, oracle=None) -> bool:
    """Does the oracle judge ``i`` and ``j`` independent given ``k``?"""
    src = as_source(src)
    oracle = oracle or default_oracle(src)
    if isinstance(oracle, GTest) and not isinstance(src, Empirical):
        raise ConfigurationError("the G-test oracle needs an empirical (sampled) source")
    bits = conditional_mutual_information(triple_marginal(src, i, j, k))
    dof = (_card(src, i) - 1) * (_card(src, j) - 1) * _card(src, k)
    return oracle.independent(bits, dof, src)


def classify_triplet(src, a: int, b: int, c: int, oracle=None, degenerate_mode=False):
    """Classify the adjacent triplet a - b - c.

    Normally a collider (TYPE3) is recognised by marginal independence of
    ``a`` and ``c``.  In degenerate mode children may also be marginally
    independent, so the collider is recognised by dependence given ``b``.
    Adjacency is the caller's responsibility; see :func:`recover_directions`.
    """
    if len({a, b, c}) != 3:
        raise InputError(f"triplet needs three distinct variables, got ({a}, {b}, {c})")
    if degenerate_mode:
        collider = not conditionally_independent(src, a, c, b, oracle)
    else:
        collider = independent(src, a, c, oracle)
    return TripletType.TYPE3 if collider else TripletType.TYPE12


def resolve_neighbor(src, b: int, known_parent: int, d: int, oracle=None, degenerate_mode=False):
    """Given ``known_parent -> b`` and an unoriented ``b - d``, is ``d`` a parent?"""
    if d in (b, known_parent) or known_parent == b:
        raise InputError("resolve_neighbor needs three distinct nodes")
    kind = classify_triplet(src, known_parent, b, d, oracle, degenerate_mode)
    return Role.PARENT if kind is TripletType.TYPE3 else Role.CHILD


@dataclass
class RecoveredStructure:
    """A skeleton whose edges are each directed or undetermined.

    ``edge_states`` maps each skeleton edge ``(u, v)`` with ``u < v`` to the
    directed pair ``(parent, child)`` or to ``None`` when undetermined.
    """

    skeleton: Skeleton
    edge_states: dict
    basins: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.skeleton.n

    @property
    def directed_edges(self) -> set[tuple[int, int]]:
        return {s for s in self.edge_states.values() if s is not None}

    @property
    def undetermined_edges(self) -> set[tuple[int, int]]:
        return {e for e, s in self.edge_states.items() if s is None}

    def parents(self, i: int) -> list[int]:
        return sorted(u for u, v in self.directed_edges if v == i)


def peel_layers(sk: Skeleton) -> list[int]:
    """Layer index of every node: leaves are 0, leaves once those go are 1, ..."""
    adj = [set(a) for a in sk.adjacency()]
    layer = [0] * sk.n
    alive = set(range(sk.n))
    k = 0
    while alive:
        leaves = [i for i in alive if len(adj[i] & alive) <= 1]
        for i in leaves:
            layer[i] = k
        alive -= set(leaves)
        k += 1
    return layer


class _Sweep:
    def __init__(self, src, sk, oracle, degenerate_mode):
        self.src = src
        self.sk = sk
        self.oracle = oracle
        self.degenerate = degenerate_mode
        self.adj = sk.adjacency()
        self.state = {e: None for e in sorted(sk.edges)}
        self.blocked = set()
        self.warnings = []
        self.names = src.names

    def _key(self, u, v):
        return (min(u, v), max(u, v))

    def unoriented(self, x):
        return [
            d for d in self.adj[x]
            if self.state[self._key(x, d)] is None and self._key(x, d) not in self.blocked
        ]

    def parents(self, x):
        return [d for d in self.adj[x] if self.state[self._key(x, d)] == (d, x)]

    def collider(self, a, b, c):
        return classify_triplet(self.src, a, b, c, self.oracle, self.degenerate) is TripletType.TYPE3

    def block(self, x, d, reason):
        self.blocked.add(self._key(x, d))
        self.warnings.append(
            f"oracle conflict on {self.names[x]}-{self.names[d]}: {reason}; left undetermined"
        )

    def try_parent(self, d, x):
        """Orient d -> x if d is compatible with every known parent of x."""
        clash = [p for p in self.parents(x) if p != d and not self.collider(p, x, d)]
        if clash:
            self.block(x, d, f"{self.names[d]} looks like a parent of {self.names[x]} but "
                             f"depends on parent {self.names[clash[0]]}")
            return False
        self.state[self._key(d, x)] = (d, x)
        return True

    def try_child(self, x, d):
        clash = [p for p in self.parents(x) if self.collider(p, x, d)]
        if clash:
            self.block(x, d, f"{self.names[d]} looks like a child of {self.names[x]} but "
                             f"is independent of parent {self.names[clash[0]]}")
            return False
        self.state[self._key(x, d)] = (x, d)
        return True

    def propagate(self, queue):
        queue = deque(queue)
        while queue:
            x = queue.popleft()
            ps = self.parents(x)
            if not ps:
                continue
            known = ps[0]
            for d in self.unoriented(x):
                role = resolve_neighbor(self.src, x, known, d, self.oracle, self.degenerate)
                if role is Role.PARENT:
                    self.try_parent(d, x)
                elif self.try_child(x, d):
                    queue.append(d)

    def scan(self, b) -> bool:
        un = self.unoriented(b)
        if len(un) < 2 or self.parents(b):
            return False
        for a, c in itertools.combinations(un, 2):
            if self.collider(a, b, c):
                self.state[self._key(a, b)] = (a, b)
                self.try_parent(c, b)
                self.propagate([b])
                return True
        return False


def _components(edges):
    adj = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        nodes = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in nodes:
                    nodes.add(w)
                    stack.append(w)
        seen |= nodes
        comps.append(sorted(e for e in edges if e[0] in nodes))
    return comps


def recover_directions(src, sk: Skeleton, oracle=None, degenerate_mode=False) -> RecoveredStructure:
    """Orient every branch whose direction the distribution determines.

    Internal nodes are scanned from the outermost peeling layer inward for a
    pair of neighbours forming a collider.  Each discovery orients the
    node's branches and then sweeps the causal flow: every node with an
    incoming arrow has its other branches resolved against a known parent,
    until nothing changes.  Whatever remains is undetermined.
    """
    src = as_source(src)
    if sk.n != src.n:
        raise InputError(f"skeleton has {sk.n} nodes but the source has {src.n} variables")
    oracle = oracle or default_oracle(src)
    sweep = _Sweep(src, sk, oracle, degenerate_mode)
    layer = peel_layers(sk)
    internal = sorted((i for i in range(sk.n) if len(sweep.adj[i]) >= 2), key=lambda i: (layer[i], i))
    changed = True
    while changed:
        changed = False
        for b in internal:
            changed |= sweep.scan(b)

    names = src.names
    warnings = list(sk.warnings)
    if sk.tie_report and not degenerate_mode:
        warnings.append("skeleton has weight ties; consider degenerate mode (conditional tests)")
    warnings.extend(sweep.warnings)
    for (u, v), s in sweep.state.items():
        if s is None:
            warnings.append(
                f"edge {names[u]}-{names[v]} undetermined: orientation requires external semantics"
            )
    directed = [s for s in sweep.state.values() if s is not None]
    return RecoveredStructure(sk, dict(sweep.state), _components(directed), warnings)


def basin_edges(model) -> set[tuple[int, int]]:
    """Directed edges of ``model`` lying inside some causal basin.

    A basin starts at a node with two or more parents and takes in all of
    that node's descendants together with every parent of those nodes, so
    its edges are exactly the incoming edges of the node and its
    descendants.
    """
    edges = set()
    for m in range(model.n):
        if len(model.parents[m]) < 2:
            continue
        stack = [m]
        reached = {m}
        while stack:
            x = stack.pop()
            edges.update((p, x) for p in model.parents[x])
            for c in model.children[x]:
                if c not in reached:
                    reached.add(c)
                    stack.append(c)
    return edges
