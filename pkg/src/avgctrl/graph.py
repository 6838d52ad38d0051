"""
Sparsity patterns, strong components, skeleton graphs and cores.

Nodes are plain integers: ``0`` is the control node (beta) and ``1..n`` are
the state nodes alpha_1..alpha_n.  An edge ``(j, i)`` between state nodes
means the entry ``a_ij`` may be nonzero; an edge ``(0, i)`` means ``b_i`` may
be nonzero.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

__all__ = [
    "BETA",
    "PatternError",
    "BetaHasInNeighbor",
    "NotWeaklyConnected",
    "DuplicateEdge",
    "UnknownNode",
    "parse_node",
    "node_label",
    "SparsityPattern",
    "validate_pattern",
    "SccDecomposition",
    "strong_components",
    "SkeletonGraph",
    "skeleton",
    "CoreSubgraph",
    "cycle_successors",
    "core",
    "DecisionReport",
    "decide_structural_avg_ctrl",
]

BETA = 0


class PatternError(ValueError):
    """Base class for malformed sparsity patterns."""


class BetaHasInNeighbor(PatternError):
    pass


class NotWeaklyConnected(PatternError):
    pass


class DuplicateEdge(PatternError):
    pass


class UnknownNode(PatternError):
    pass


_ALPHA_RE = re.compile(r"^a(?:lpha)?_?([0-9]+)$")


def parse_node(token) -> int:
    """Map a node token to its integer id.

    ``"b"`` and ``"beta"`` give 0; ``"a<k>"`` gives ``k``.  Integers are
    passed through.
    """
    if isinstance(token, bool):
        raise UnknownNode(f"unknown node {token!r}")
    if isinstance(token, int):
        if token < 0:
            raise UnknownNode(f"unknown node {token!r}")
        return token
    if not isinstance(token, str):
        raise UnknownNode(f"unknown node {token!r}")
    tok = token.strip().lower()
    if tok in ("b", "beta"):
        return BETA
    m = _ALPHA_RE.match(tok)
    if m is None or int(m.group(1)) == 0:
        raise UnknownNode(f"unknown node {token!r}")
    return int(m.group(1))


def node_label(v: int) -> str:
    return "b" if v == BETA else f"a{v}"


@dataclass(frozen=True)
class SparsityPattern:
    """A digraph on ``n + 1`` nodes encoding the free entries of ``(A, b)``.

    Use :func:`validate_pattern` to build one from untrusted input; the
    constructor only normalizes the edge set.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset((int(u), int(v)) for u, v in self.edges))

    @property
    def nodes(self) -> range:
        return range(self.n + 1)

    @cached_property
    def _out(self) -> tuple:
        out = [[] for _ in self.nodes]
        for u, v in sorted(self.edges):
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    @cached_property
    def _in(self) -> tuple:
        inn = [[] for _ in self.nodes]
        for u, v in sorted(self.edges, key=lambda e: (e[1], e[0])):
            inn[v].append(u)
        return tuple(tuple(x) for x in inn)

    def successors(self, v: int) -> tuple:
        """Out-neighbors of ``v`` in ascending order."""
        return self._out[v]

    def predecessors(self, v: int) -> tuple:
        """In-neighbors of ``v`` in ascending order."""
        return self._in[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def reachable_from(self, sources: Iterable[int]) -> frozenset:
        """Nodes reachable from ``sources`` by walks of length >= 0."""
        seen = set(sources)
        stack = list(seen)
        while stack:
            u = stack.pop()
            for v in self._out[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return frozenset(seen)

    def subgraph(self, edges: Iterable) -> "SparsityPattern":
        """Same node set, restricted edge set."""
        edges = frozenset(edges)
        if not edges <= self.edges:
            raise ValueError("edges are not a subset of the pattern")
        return SparsityPattern(self.n, edges)

    def relabel(self, perm: Sequence[int]) -> "SparsityPattern":
        """Apply ``perm[old] = new`` to every node."""
        return SparsityPattern(self.n, frozenset((perm[u], perm[v]) for u, v in self.edges))

    def to_edge_list(self) -> list:
        return [(node_label(u), node_label(v)) for u, v in self.sorted_edges()]


def _is_weakly_connected(n: int, edges: Iterable) -> bool:
    adj = [[] for _ in range(n + 1)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {BETA}
    queue = deque([BETA])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n + 1


def validate_pattern(raw_edges: Iterable, n: Optional[int] = None) -> SparsityPattern:
    """Build a :class:`SparsityPattern` from an edge list, checking membership
    in the class of admissible patterns.

    Parameters
    ----------
    raw_edges : iterable of pairs
        Node tokens (``"b"``, ``"a3"``, ...) or integer ids.
    n : int, optional
        Number of state nodes.  Inferred as the largest alpha index if omitted.

    Raises
    ------
    UnknownNode, DuplicateEdge, BetaHasInNeighbor, NotWeaklyConnected
    """
    edges = []
    seen = set()
    for pair in raw_edges:
        try:
            a, b = pair
        except (TypeError, ValueError):
            raise PatternError(f"edge {pair!r} is not a pair") from None
        u, v = parse_node(a), parse_node(b)
        if (u, v) in seen:
            raise DuplicateEdge(f"duplicate edge {node_label(u)} -> {node_label(v)}")
        seen.add((u, v))
        edges.append((u, v))

    top = max((max(e) for e in edges), default=0)
    if n is None:
        n = top
    elif top > n:
        raise UnknownNode(f"node {node_label(top)} exceeds n={n}")
    if n < 1:
        raise PatternError("a pattern needs at least one state node")

    for u, v in edges:
        if v == BETA:
            raise BetaHasInNeighbor(f"edge {node_label(u)} -> b enters the control node")
    if not _is_weakly_connected(n, edges):
        raise NotWeaklyConnected("the underlying undirected graph is not connected")
    return SparsityPattern(n, frozenset(edges))


@dataclass(frozen=True)
class SccDecomposition:
    """Strong components ordered by their smallest node.

    ``components[0]`` is always ``(BETA,)``.
    """

    components: tuple
    component_of: tuple
    nontrivial: tuple

    def __len__(self):
        return len(self.components)


def strong_components(g: SparsityPattern) -> SccDecomposition:
    """Tarjan's algorithm, iterative."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0
    for root in g.nodes:
        if root in index:
            continue
        work = [(root, iter(g.successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(g.successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))

    comps.sort(key=lambda c: c[0])
    component_of = [0] * (g.n + 1)
    for k, comp in enumerate(comps):
        for v in comp:
            component_of[v] = k
    nontrivial = tuple(len(c) > 1 or g.has_edge(c[0], c[0]) for c in comps)
    return SccDecomposition(tuple(comps), tuple(component_of), nontrivial)


@dataclass(frozen=True)
class SkeletonGraph:
    """Condensation of the strong components; ``pi[v]`` is the skeleton node
    of pattern node ``v``.  Nontrivial components carry a self-loop."""

    size: int
    edges: frozenset
    pi: tuple

    @cached_property
    def _out(self) -> tuple:
        out = [[] for _ in range(self.size)]
        for i, j in sorted(self.edges):
            out[i].append(j)
        return tuple(tuple(x) for x in out)

    @cached_property
    def _in(self) -> tuple:
        inn = [[] for _ in range(self.size)]
        for i, j in sorted(self.edges, key=lambda e: (e[1], e[0])):
            inn[j].append(i)
        return tuple(tuple(x) for x in inn)

    def successors(self, w: int) -> tuple:
        return self._out[w]

    def predecessors(self, w: int) -> tuple:
        return self._in[w]

    def has_loop(self, w: int) -> bool:
        return (w, w) in self.edges

    def loopless_edges(self) -> frozenset:
        return frozenset(e for e in self.edges if e[0] != e[1])

    def preimage(self, g: SparsityPattern, edge: tuple) -> list:
        """Pattern edges mapped onto the skeleton edge ``edge``."""
        return sorted(e for e in g.edges if (self.pi[e[0]], self.pi[e[1]]) == edge)


def skeleton(g: SparsityPattern, scc: SccDecomposition) -> SkeletonGraph:
    pi = scc.component_of
    edges = {(pi[u], pi[v]) for u, v in g.edges}
    return SkeletonGraph(len(scc.components), frozenset(edges), tuple(pi))


@dataclass(frozen=True)
class CoreSubgraph:
    """Subgraph induced by the nodes that are not successors of any cycle.

    ``depth`` holds, for every core node reachable from beta, the length of
    the longest beta-path inside the core (beta has depth 0).  On a core that
    is a path this is the length of the unique beta-path.
    """

    nodes: frozenset
    edges: frozenset
    depth: dict

    @property
    def core_order(self) -> int:
        """Number of core nodes, beta included."""
        return len(self.nodes)

    @property
    def core_alpha_count(self) -> int:
        """Number of core state nodes."""
        return len(self.nodes) - 1

    def sorted_nodes(self) -> list:
        return sorted(self.nodes)


def cycle_successors(g: SparsityPattern, scc: SccDecomposition) -> frozenset:
    """Every node reachable from a node lying on a cycle (cycle nodes included)."""
    on_cycles = [v for k, comp in enumerate(scc.components) if scc.nontrivial[k] for v in comp]
    return g.reachable_from(on_cycles)


def _topological_order(nodes: Iterable[int], edges: Iterable) -> list:
    """Kahn's algorithm, always emitting the smallest available node."""
    import heapq

    nodes = sorted(nodes)
    indeg = {v: 0 for v in nodes}
    out = {v: [] for v in nodes}
    for u, v in edges:
        out[u].append(v)
        indeg[v] += 1
    ready = [v for v in nodes if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != len(nodes):
        raise ValueError("graph has a cycle")
    return order


def core(g: SparsityPattern, scc: Optional[SccDecomposition] = None) -> CoreSubgraph:
    if scc is None:
        scc = strong_components(g)
    keep = frozenset(g.nodes) - cycle_successors(g, scc)
    edges = frozenset((u, v) for u, v in g.edges if u in keep and v in keep)
    depth = {BETA: 0}
    for u in _topological_order(keep, edges):
        if u not in depth:
            continue
        for v in g.successors(u):
            if v in keep:
                depth[v] = max(depth.get(v, 0), depth[u] + 1)
    return CoreSubgraph(keep, edges, depth)


@dataclass(frozen=True)
class DecisionReport:
    """Outcome of the structural averaged controllability test.

    ``verdict`` holds iff every state node is reachable from beta and the
    core has a directed spanning path.  ``witness`` is that path, beta first.
    ``obstruction`` is the first pair of consecutive nodes in the (smallest
    first) topological order of the core that are not joined by an edge.
    ``unreachable`` lists state nodes with no walk from beta.
    """

    verdict: bool
    core: CoreSubgraph
    scc: SccDecomposition
    topological_order: tuple
    witness: Optional[tuple] = None
    obstruction: Optional[tuple] = None
    unreachable: tuple = ()

    @property
    def core_has_spanning_path(self) -> bool:
        return self.obstruction is None


def decide_structural_avg_ctrl(g: SparsityPattern) -> DecisionReport:
    scc = strong_components(g)
    cr = core(g, scc)
    order = tuple(_topological_order(cr.nodes, cr.edges))
    obstruction = None
    for u, v in zip(order, order[1:]):
        if (u, v) not in cr.edges:
            obstruction = (u, v)
            break
    unreachable = tuple(sorted(frozenset(g.nodes) - g.reachable_from([BETA])))
    verdict = obstruction is None and not unreachable
    return DecisionReport(
        verdict=verdict,
        core=cr,
        scc=scc,
        topological_order=order,
        witness=order if verdict else None,
        obstruction=obstruction,
        unreachable=unreachable,
    )
