"""
Explicit ensemble pair for a reduced graph.

Each edge ``e`` gets an exponent ``nu(e) = a/L + b*lam`` with ``a, b``
nonnegative integers, ``L`` the lcm of the cycle lengths and ``lam`` a fixed
irrational.  The pair ``(A, b)`` then has entries ``|sigma| ** nu(e)`` over
``sigma`` uniform on ``[-1, 1]``.  Exponents are kept as integer pairs so
that equality tests are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import BETA, SparsityPattern, node_label
from .reduction import NotReduced, ReducedGraph, analyze_reduced

__all__ = [
    "NuValue",
    "LambdaSpec",
    "LAMBDAS",
    "SQRT2",
    "NotCanonical",
    "WindowExceeded",
    "CanonicalLabeling",
    "canonical_relabel",
    "relabel",
    "EdgePartition",
    "partition_edges",
    "EdgeWeighting",
    "build_nu",
    "WalkDescriptor",
    "nu_of_walk",
    "expand_walk",
    "ReachableSet",
    "reachable_set",
    "base_index",
    "window_cap",
    "SymbolicEnsemble",
    "build_ensemble",
    "Certificate",
    "build_certificate",
]


@dataclass(frozen=True, order=True)
class LambdaSpec:
    tag: str
    value: float


SQRT2 = LambdaSpec("sqrt2", math.sqrt(2.0))
LAMBDAS = {
    "sqrt2": SQRT2,
    "sqrt3": LambdaSpec("sqrt3", math.sqrt(3.0)),
    "sqrt5": LambdaSpec("sqrt5", math.sqrt(5.0)),
    "pi": LambdaSpec("pi", math.pi),
    "e": LambdaSpec("e", math.e),
}


@dataclass(frozen=True, order=True)
class NuValue:
    """The number ``rat / denom + irr * lam``.

    Equality compares the integer pair, which is exact because ``lam`` is
    irrational.  Values with different ``denom`` cannot be combined.
    """

    rat: int = 0
    irr: int = 0
    denom: int = 1

    def _check(self, other: "NuValue"):
        if self.denom != other.denom:
            raise ValueError(f"mismatched denominators {self.denom} and {other.denom}")

    def __add__(self, other: "NuValue") -> "NuValue":
        self._check(other)
        return NuValue(self.rat + other.rat, self.irr + other.irr, self.denom)

    def __sub__(self, other: "NuValue") -> "NuValue":
        self._check(other)
        return NuValue(self.rat - other.rat, self.irr - other.irr, self.denom)

    def shift(self, k: int) -> "NuValue":
        """Add the integer ``k``."""
        return NuValue(self.rat + k * self.denom, self.irr, self.denom)

    def is_zero(self) -> bool:
        return self.rat == 0 and self.irr == 0

    def is_nonnegative(self) -> bool:
        return self.rat >= 0 and self.irr >= 0

    def value(self, lam: LambdaSpec = SQRT2) -> float:
        return self.rat / self.denom + self.irr * lam.value

    def format(self, lam: LambdaSpec = SQRT2) -> str:
        return f"{self.rat}/{self.denom} + {self.irr}*{lam.tag}"

    def __str__(self):
        return self.format()


class NotCanonical(ValueError):
    pass


class WindowExceeded(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalLabeling:
    """``perm[old] = new`` over all nodes; beta stays at 0."""

    perm: tuple

    @property
    def inverse(self) -> tuple:
        inv = [0] * len(self.perm)
        for old, new in enumerate(self.perm):
            inv[new] = old
        return tuple(inv)

    def is_identity(self) -> bool:
        return all(i == p for i, p in enumerate(self.perm))


def canonical_relabel(g: ReducedGraph) -> CanonicalLabeling:
    """Relabel state nodes by ``(depth, original index)``."""
    order = sorted(range(1, g.n + 1), key=lambda v: (g.depth[v], v))
    perm = [0] * (g.n + 1)
    for new, old in enumerate(order, start=1):
        perm[old] = new
    return CanonicalLabeling(tuple(perm))


def relabel(g: ReducedGraph, labeling: CanonicalLabeling) -> ReducedGraph:
    return analyze_reduced(g.pattern.relabel(labeling.perm))


def _is_depth_monotone(g: ReducedGraph) -> bool:
    return all(g.depth[i] <= g.depth[i + 1] for i in range(1, g.n))


@dataclass(frozen=True)
class EdgePartition:
    core: frozenset
    core_to_cycle: frozenset
    cycle: frozenset
    cycle_to_appendix: frozenset
    appendix: frozenset

    def as_tuple(self) -> tuple:
        return (self.core, self.core_to_cycle, self.cycle, self.cycle_to_appendix, self.appendix)


def partition_edges(g: ReducedGraph) -> EdgePartition:
    core_n, cyc_n, app_n = g.core_nodes, g.cycle_nodes, g.appendix
    groups = [set() for _ in range(5)]
    for u, v in g.pattern.edges:
        if u in core_n and v in core_n:
            groups[0].add((u, v))
        elif u in core_n and v in cyc_n:
            groups[1].add((u, v))
        elif u in cyc_n and v in cyc_n:
            groups[2].add((u, v))
        elif u in cyc_n and v in app_n:
            groups[3].add((u, v))
        elif u in app_n and v in app_n:
            groups[4].add((u, v))
        else:
            raise NotReduced(f"edge {node_label(u)}->{node_label(v)} fits no edge class")
    return EdgePartition(*(frozenset(s) for s in groups))


@dataclass(frozen=True)
class EdgeWeighting:
    nu: dict
    L: int
    ell_max: int
    lam: LambdaSpec = SQRT2

    def __getitem__(self, edge) -> NuValue:
        return self.nu[edge]

    def table(self) -> list:
        return [
            {"edge": [node_label(u), node_label(v)], "rat": w.rat, "irr": w.irr,
             "denom": w.denom, "nu": w.format(self.lam)}
            for (u, v), w in sorted(self.nu.items())
        ]


def build_nu(g: ReducedGraph, lam: LambdaSpec = SQRT2) -> EdgeWeighting:
    """Assign exponents edge class by edge class.

    Core edges get 0; an edge into the entry node ``p0`` of a cycle gets
    ``p0*lam``; the closing edge of a cycle of length ``l`` gets ``l/L`` and
    the other cycle edges 0; an edge from a cycle into the appendix node
    ``j`` gets ``(j - p0)*lam``; an appendix edge ``i -> j`` gets
    ``(j - i)*lam``.  Node indices must be depth-monotone.
    """
    if not _is_depth_monotone(g):
        raise NotCanonical("state nodes must be labeled in nondecreasing depth order")
    lengths = [len(c) for c in g.cycles]
    L = math.lcm(*lengths) if lengths else 1
    ell_max = max(lengths, default=0)
    part = partition_edges(g)
    entry = {p: c[0] for p, c in enumerate(g.cycles)}
    closing = {(c[-1], c[0]) for c in g.cycles}

    nu = {}
    for e in part.core:
        nu[e] = NuValue(0, 0, L)
    for u, v in part.core_to_cycle:
        nu[(u, v)] = NuValue(0, v, L)
    for e in part.cycle:
        p = g.owner[e[0]]
        nu[e] = NuValue(len(g.cycles[p]), 0, L) if e in closing else NuValue(0, 0, L)
    for u, v in part.cycle_to_appendix:
        nu[(u, v)] = NuValue(0, v - entry[g.owner[u]], L)
    for u, v in part.appendix:
        nu[(u, v)] = NuValue(0, v - u, L)
    for e, w in nu.items():
        if not w.is_nonnegative():
            raise NotCanonical(f"negative exponent on {e}: labeling is not depth-monotone")
    return EdgeWeighting(nu, L, ell_max, lam)


def base_index(g: ReducedGraph) -> int:
    """Smallest ``j`` exceeding the core order and every ``d_p - l_p``.

    Beyond it the reachable sets are periodic with period ``L``.
    """
    bound = len(g.core_path)
    for p, cyc in enumerate(g.cycles):
        bound = max(bound, g.max_depth(p) - len(cyc))
    return bound + 1


def window_cap(g: ReducedGraph, w: EdgeWeighting) -> int:
    """Largest walk length or column index served."""
    return base_index(g) + max(2, w.ell_max) * w.L * g.n


@dataclass(frozen=True)
class WalkDescriptor:
    """The unique walk of ``length`` edges from beta to ``target``.

    ``cycle`` is the entry node of the cycle that is looped ``loops`` times,
    or None for core targets.
    """

    target: int
    length: int
    cycle: Optional[int]
    loops: int
    nu: NuValue


def nu_of_walk(g: ReducedGraph, w: EdgeWeighting, target: int, j: int) -> Optional[WalkDescriptor]:
    """Closed-form exponent of the length-``j`` walk to ``target``, or None."""
    if j > window_cap(g, w):
        raise WindowExceeded(f"walk length {j} exceeds window cap {window_cap(g, w)}")
    dep = g.depth[target]
    if target in g.core_nodes:
        if j != dep:
            return None
        return WalkDescriptor(target, j, None, 0, NuValue(0, 0, w.L))
    p = g.owner[target]
    cyc = g.cycles[p]
    ell = len(cyc)
    if j < dep or (j - dep) % ell:
        return None
    irr = cyc[0] if target in cyc else target
    return WalkDescriptor(target, j, cyc[0], (j - dep) // ell, NuValue(j - dep, irr, w.L))


def expand_walk(g: ReducedGraph, walk: WalkDescriptor) -> list:
    """Node sequence of ``walk``: beta-path to the entry, loops, then on."""

    def path_to(v):
        seq = [v]
        while seq[-1] != BETA:
            # unique in-neighbor one level up
            u = next(x for x in g.pattern.predecessors(seq[-1]) if g.depth[x] == g.depth[seq[-1]] - 1)
            seq.append(u)
        return seq[::-1]

    if walk.cycle is None:
        return path_to(walk.target)
    entry = walk.cycle
    cyc = list(g.cycles[g.owner[entry]])
    head = path_to(entry)
    tail = path_to(walk.target)[len(head) - 1:]
    return head + (cyc[1:] + [entry]) * walk.loops + tail[1:]


@dataclass(frozen=True)
class ReachableSet:
    j: int
    members: frozenset
    slices: dict = field(default_factory=dict)


def reachable_set(g: ReducedGraph, j: int) -> ReachableSet:
    """State nodes reached from beta by a walk of exactly ``j`` edges,
    with the slice inside each cycle's successor set keyed by entry node."""
    if j < 1:
        raise ValueError("j must be positive")
    members = {v for v in g.core_path[1:] if g.depth[v] == j}
    slices = {c[0]: set() for c in g.cycles}
    for v, p in g.owner.items():
        dep, ell = g.depth[v], len(g.cycles[p])
        if dep <= j and (j - dep) % ell == 0:
            members.add(v)
            slices[g.cycles[p][0]].add(v)
    return ReachableSet(j, frozenset(members), {k: frozenset(s) for k, s in slices.items()})


@dataclass(frozen=True)
class SymbolicEnsemble:
    """Pair ``(A, b)`` with entries ``|sigma| ** nu``.

    ``a[(i, j)]`` is the exponent of ``a_ij`` (edge ``j -> i``);
    ``b[i]`` that of ``b_i`` (edge ``beta -> i``).  Indices are 1-based.
    Absent positions are structural zeros.
    """

    n: int
    a: dict
    b: dict
    lam: LambdaSpec = SQRT2
    measure: str = "uniform on [-1, 1]"
    f: str = "|sigma|"

    def pattern(self) -> SparsityPattern:
        edges = {(j, i) for i, j in self.a} | {(BETA, i) for i in self.b}
        return SparsityPattern(self.n, frozenset(edges))

    def evaluate(self, sigma) -> tuple:
        """Return ``A`` with shape ``(N, n, n)`` and ``b`` with shape ``(N, n)``."""
        s = np.abs(np.atleast_1d(np.asarray(sigma, dtype=float)))
        A = np.zeros((s.size, self.n, self.n))
        b = np.zeros((s.size, self.n))
        for (i, j), nu in self.a.items():
            A[:, i - 1, j - 1] = 1.0 if nu.is_zero() else s ** nu.value(self.lam)
        for i, nu in self.b.items():
            b[:, i - 1] = 1.0 if nu.is_zero() else s ** nu.value(self.lam)
        return A, b


def build_ensemble(g: ReducedGraph, w: EdgeWeighting) -> SymbolicEnsemble:
    a, b = {}, {}
    for (u, v), nu in w.nu.items():
        if u == BETA:
            b[v] = nu
        else:
            a[(v, u)] = nu
    ens = SymbolicEnsemble(g.n, a, b, w.lam)
    if ens.pattern().edges != g.pattern.edges:
        raise ValueError("ensemble is not compliant with the pattern")
    return ens


@dataclass(frozen=True)
class Certificate:
    """Everything needed to evaluate the averaged controllability matrix.

    ``graph`` is the canonically relabeled reduced graph; ``labeling`` maps
    the original node ids to it.
    """

    graph: ReducedGraph
    labeling: CanonicalLabeling
    partition: EdgePartition
    weighting: EdgeWeighting
    ensemble: SymbolicEnsemble

    def original_ensemble(self) -> SymbolicEnsemble:
        """The same ensemble indexed by the node names of the input pattern."""
        inv = self.labeling.inverse
        ens = self.ensemble
        a = {(inv[i], inv[j]): nu for (i, j), nu in ens.a.items()}
        b = {inv[i]: nu for i, nu in ens.b.items()}
        return SymbolicEnsemble(ens.n, a, b, ens.lam)


def build_certificate(reduced: ReducedGraph, lam: LambdaSpec = SQRT2) -> Certificate:
    labeling = canonical_relabel(reduced)
    g = relabel(reduced, labeling)
    w = build_nu(g, lam)
    return Certificate(g, labeling, partition_edges(g), w, build_ensemble(g, w))
