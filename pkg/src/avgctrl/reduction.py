"""
Pruning a qualifying pattern down to a reduced graph.

A reduced graph has a skeleton that is a directed tree whose core is a
directed path, exactly one pattern edge above every non-loop skeleton edge,
and only simple cycles as nontrivial components, each hanging directly off
the core path.  Every walk from beta in such a graph is determined by its
endpoint and length, which is what makes the certificate construction in
:mod:`avgctrl.certificate` tractable.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Literal, Optional

from .graph import (
    BETA,
    DecisionReport,
    SparsityPattern,
    core,
    cycle_successors,
    decide_structural_avg_ctrl,
    node_label,
    skeleton,
    strong_components,
)

__all__ = [
    "NotStructurallyAvgControllable",
    "NotReduced",
    "Violation",
    "ReducedGraph",
    "CycleStep",
    "ReductionTrace",
    "validate_reduced",
    "analyze_reduced",
    "reduce",
]

TieBreak = Literal["min", "max"]


class NotStructurallyAvgControllable(ValueError):
    pass


class NotReduced(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    clause: str
    detail: str


CLAUSES = (
    "skeleton-is-tree",
    "skeleton-core-is-path",
    "edge-preimage-singleton",
    "cycle-adjacent-to-core",
    "component-is-cycle",
)


def _labels(nodes) -> str:
    return "{" + ", ".join(node_label(v) for v in sorted(nodes)) + "}"


def validate_reduced(g: SparsityPattern) -> list:
    """Check each clause of reducedness independently.

    Returns a list of :class:`Violation` in a fixed clause order; an empty
    list means ``g`` is reduced.
    """
    scc = strong_components(g)
    sk = skeleton(g, scc)
    out = []

    loopless = sk.loopless_edges()
    indeg = [0] * sk.size
    for _, j in loopless:
        indeg[j] += 1
    reach = {0}
    queue = deque([0])
    while queue:
        w = queue.popleft()
        for x in sk.successors(w):
            if x not in reach:
                reach.add(x)
                queue.append(x)
    bad = [w for w in range(1, sk.size) if indeg[w] != 1]
    if bad or len(reach) != sk.size:
        out.append(Violation(CLAUSES[0], f"skeleton nodes with in-degree != 1 or unreachable: {bad}"))

    # core of the skeleton: nodes that are not successors of a looped node
    looped = [w for w in range(sk.size) if sk.has_loop(w)]
    succ = set(looped)
    queue = deque(looped)
    while queue:
        w = queue.popleft()
        for x in sk.successors(w):
            if x not in succ:
                succ.add(x)
                queue.append(x)
    s_core = [w for w in range(sk.size) if w not in succ]
    s_core_set = set(s_core)
    core_edges = {(i, j) for i, j in loopless if i in s_core_set and j in s_core_set}
    path_ok = 0 in s_core_set
    if path_ok:
        nxt = {}
        for i, j in core_edges:
            if i in nxt:
                path_ok = False
            nxt[i] = j
        w, count = 0, 1
        while path_ok and w in nxt:
            w = nxt[w]
            count += 1
        path_ok = path_ok and count == len(s_core) and len(core_edges) == len(s_core) - 1
    if not path_ok:
        out.append(Violation(CLAUSES[1], f"skeleton core {sorted(s_core)} is not a directed path"))

    multi = []
    for e in sorted(loopless):
        pre = sk.preimage(g, e)
        if len(pre) != 1:
            multi.append((e, pre))
    if multi:
        detail = "; ".join(
            f"w{i}->w{j}: " + ", ".join(f"{node_label(u)}->{node_label(v)}" for u, v in pre)
            for (i, j), pre in multi
        )
        out.append(Violation(CLAUSES[2], detail))

    far = [w for w in looped if not any(p in s_core_set for p in sk.predecessors(w) if p != w)]
    if far:
        out.append(Violation(CLAUSES[3], "looped components off the core: "
                             + ", ".join(_labels(scc.components[w]) for w in far)))

    not_cycle = []
    for w in looped:
        comp = scc.components[w]
        inner = [(u, v) for u, v in g.edges if sk.pi[u] == w and sk.pi[v] == w]
        outdeg = {v: 0 for v in comp}
        for u, _ in inner:
            outdeg[u] += 1
        # strongly connected with |E| = |V| and out-degree 1 everywhere is a single cycle
        if len(inner) != len(comp) or any(d != 1 for d in outdeg.values()):
            not_cycle.append(comp)
    if not_cycle:
        out.append(Violation(CLAUSES[4], "components that are not cycles: "
                             + ", ".join(_labels(c) for c in not_cycle)))
    return out


@dataclass(frozen=True)
class ReducedGraph:
    """A reduced pattern together with its walk structure.

    Attributes
    ----------
    pattern : SparsityPattern
    core_path : tuple
        Core nodes in path order, beta first.
    cycles : tuple of tuples
        Each cycle as ``(entry, next, ..., last)``; ``last -> entry`` closes
        it.  Ordered by entry node.
    depth : tuple
        ``depth[v]`` is the length of the unique beta-path to ``v``.
    owner : dict
        Maps every successor-of-a-cycle node to the position of its cycle in
        ``cycles``.
    """

    pattern: SparsityPattern
    core_path: tuple
    cycles: tuple
    depth: tuple
    owner: dict

    @property
    def n(self) -> int:
        return self.pattern.n

    @property
    def entry_nodes(self) -> tuple:
        return tuple(c[0] for c in self.cycles)

    @property
    def core_nodes(self) -> frozenset:
        return frozenset(self.core_path)

    @property
    def cycle_nodes(self) -> frozenset:
        return frozenset(v for c in self.cycles for v in c)

    @property
    def appendix(self) -> frozenset:
        return frozenset(self.owner) - self.cycle_nodes

    @property
    def appendix_edges(self) -> frozenset:
        app = self.appendix
        return frozenset(e for e in self.pattern.edges if e[0] in app and e[1] in app)

    def cycle_length(self, p: int) -> int:
        return len(self.cycles[p])

    def successor_set(self, p: int) -> frozenset:
        return frozenset(v for v, q in self.owner.items() if q == p)

    def max_depth(self, p: int) -> int:
        return max(self.depth[v] for v in self.successor_set(p))


def analyze_reduced(g: SparsityPattern) -> ReducedGraph:
    """Extract the walk structure of a reduced pattern.

    Raises :class:`NotReduced` listing the violated clauses otherwise.
    """
    violations = validate_reduced(g)
    if violations:
        raise NotReduced("; ".join(f"{v.clause}: {v.detail}" for v in violations))
    scc = strong_components(g)
    cr = core(g, scc)
    path = [BETA]
    while True:
        nxt = [v for v in g.successors(path[-1]) if v in cr.nodes]
        if not nxt:
            break
        path.append(nxt[0])

    cycles = []
    for k, comp in enumerate(scc.components):
        if not scc.nontrivial[k]:
            continue
        members = set(comp)
        entry = next(v for v in comp if any(u in cr.nodes for u in g.predecessors(v)))
        seq = [entry]
        while True:
            nxt = next(v for v in g.successors(seq[-1]) if v in members)
            if nxt == entry:
                break
            seq.append(nxt)
        cycles.append(tuple(seq))
    cycles.sort(key=lambda c: c[0])

    owner = {}
    for p, cyc in enumerate(cycles):
        for v in g.reachable_from([cyc[0]]):
            owner[v] = p

    # BFS distances are the unique path lengths in a reduced graph
    depth = [None] * (g.n + 1)
    depth[BETA] = 0
    queue = deque([BETA])
    while queue:
        u = queue.popleft()
        for v in g.successors(u):
            if depth[v] is None:
                depth[v] = depth[u] + 1
                queue.append(v)
    assert frozenset(owner) == cycle_successors(g, scc)
    return ReducedGraph(g, tuple(path), tuple(cycles), tuple(depth), owner)


@dataclass(frozen=True)
class CycleStep:
    """What happened to one nontrivial strong component.

    Case 1 components (not fed directly from the core path) are replaced by
    a spanning tree rooted at their entry node; case 2 components keep one
    extra edge back into the entry node, leaving a single cycle.
    """

    component: tuple
    entry: int
    case: int
    tree_edges: tuple
    back_edge: Optional[tuple] = None

    @property
    def kept_edges(self) -> tuple:
        return self.tree_edges + ((self.back_edge,) if self.back_edge else ())


@dataclass(frozen=True)
class ReductionTrace:
    core_path: tuple
    skeleton_tree: tuple
    retained: tuple
    cycle_steps: tuple
    tie_break: str = "min"

    def replay(self) -> frozenset:
        """Edge set rebuilt from the recorded choices alone."""
        edges = {e for _, e in self.retained}
        for step in self.cycle_steps:
            edges.update(step.kept_edges)
        return frozenset(edges)

    def to_dict(self) -> dict:
        def el(e):
            return [node_label(e[0]), node_label(e[1])]

        return {
            "tie_break": self.tie_break,
            "core_path": [node_label(v) for v in self.core_path],
            "skeleton_tree": [[i, j] for i, j in self.skeleton_tree],
            "retained": [{"skeleton_edge": [i, j], "edge": el(e)} for (i, j), e in self.retained],
            "components": [
                {
                    "nodes": [node_label(v) for v in s.component],
                    "entry": node_label(s.entry),
                    "case": s.case,
                    "tree_edges": [el(e) for e in s.tree_edges],
                    "back_edge": el(s.back_edge) if s.back_edge else None,
                }
                for s in self.cycle_steps
            ],
        }


def _bfs_tree(g: SparsityPattern, members: set, root: int, tie_break: TieBreak) -> tuple:
    rev = tie_break == "max"
    seen = {root}
    queue = deque([root])
    tree = []
    while queue:
        u = queue.popleft()
        for v in sorted(g.successors(u), reverse=rev):
            if v in members and v not in seen:
                seen.add(v)
                tree.append((u, v))
                queue.append(v)
    return tuple(tree)


def reduce(g: SparsityPattern, decision: Optional[DecisionReport] = None,
           tie_break: TieBreak = "min"):
    """Remove edges from ``g`` until it is reduced.

    Every choice (skeleton parent, retained edge above a skeleton edge, BFS
    order inside a component, edge closing the cycle) takes the smallest
    candidate by ``(source, target)``, or the largest with
    ``tie_break="max"``.  Skeleton parents of acyclic successors of cycles
    are drawn from the successors of cycles only, so the core is preserved.

    Returns
    -------
    (ReducedGraph, ReductionTrace)
    """
    if tie_break not in ("min", "max"):
        raise ValueError(f"tie_break must be 'min' or 'max', got {tie_break!r}")
    if decision is None:
        decision = decide_structural_avg_ctrl(g)
    if not decision.verdict:
        raise NotStructurallyAvgControllable(
            f"core has no spanning path (obstruction {decision.obstruction}, "
            f"unreachable {list(decision.unreachable)})")
    pick = min if tie_break == "min" else max

    scc = decision.scc
    sk = skeleton(g, scc)
    pi = sk.pi
    path = decision.witness
    path_sk = [pi[v] for v in path]
    on_path = set(path_sk)

    # a successor of a cycle that is not itself cyclic must keep a parent among
    # the successors of cycles, or it would fall back into the core
    cyc_sk = {pi[v] for v in cycle_successors(g, scc)}
    parent = {}
    for a, b in zip(path_sk, path_sk[1:]):
        parent[b] = a
    for w in range(1, sk.size):
        if w in parent:
            continue
        preds = [x for x in sk.predecessors(w) if x != w]
        if not sk.has_loop(w):
            preds = [x for x in preds if x in cyc_sk]
        parent[w] = pick(preds)
    tree = tuple(sorted((p, w) for w, p in parent.items()))

    retained = tuple((e, pick(sk.preimage(g, e))) for e in tree)
    entry_of = {e[1]: r[1] for e, r in retained}

    steps = []
    looped = [w for w in range(sk.size) if scc.nontrivial[w]]
    for w in sorted(looped, key=lambda w: entry_of[w]):
        comp = scc.components[w]
        members = set(comp)
        entry = entry_of[w]
        tree_edges = _bfs_tree(g, members, entry, tie_break)
        if parent[w] in on_path:
            back_src = pick(u for u in g.predecessors(entry) if u in members)
            steps.append(CycleStep(comp, entry, 2, tree_edges, (back_src, entry)))
        else:
            steps.append(CycleStep(comp, entry, 1, tree_edges))

    trace = ReductionTrace(tuple(path), tree, retained, tuple(steps), tie_break)
    reduced = g.subgraph(trace.replay())
    return analyze_reduced(reduced), trace
