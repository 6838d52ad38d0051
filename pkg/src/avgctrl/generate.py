"""Random sparsity patterns with a known verdict."""
from __future__ import annotations

import random

from .graph import BETA, SparsityPattern, decide_structural_avg_ctrl, node_label

__all__ = ["random_pattern", "format_edge_list"]


def _cyclic_part(rng: random.Random, nodes: list, anchors: list, edges: set):
    """Attach ``nodes`` so that each is a successor of some cycle.

    ``anchors`` are the nodes allowed to feed the first cycle.
    """
    placed = []
    rest = list(nodes)
    while rest:
        k = rng.randint(1, min(4, len(rest)))
        cyc, rest = rest[:k], rest[k:]
        for u, v in zip(cyc, cyc[1:] + cyc[:1]):
            edges.add((u, v))
        src = rng.choice(anchors + placed) if placed else rng.choice(anchors)
        edges.add((src, cyc[0]))
        placed.extend(cyc)
        # a tail of appendix nodes hanging off what is already there
        take = rng.randint(0, min(2, len(rest)))
        tail, rest = rest[:take], rest[take:]
        for v in tail:
            edges.add((rng.choice(placed), v))
            placed.append(v)
    return placed


def _extra_edges(rng, edges, core_order, noncore, density):
    """Random edges that keep the core and its path structure intact."""
    pos = {v: k for k, v in enumerate(core_order)}
    candidates = []
    for v in noncore:
        candidates.extend((u, v) for u in core_order + noncore)
    for a in range(len(core_order)):
        for b in range(a + 2, len(core_order)):
            candidates.append((core_order[a], core_order[b]))
    for e in candidates:
        if e not in edges and rng.random() < density:
            if e[1] in pos and e[0] in pos and pos[e[0]] >= pos[e[1]]:
                continue
            edges.add(e)


def random_pattern(n: int, qualifying: bool, seed, density: float = 0.15) -> SparsityPattern:
    """Random pattern on ``n`` state nodes with a prescribed verdict.

    A qualifying pattern gets a planted core path from beta, the remaining
    nodes arranged as cycles and their successors, plus random edges that
    leave the core untouched.  A non-qualifying one gets a core whose two
    last nodes are both sinks of the core, so no spanning path exists.
    Node names are shuffled.  The verdict is rechecked before returning.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not qualifying and n < 2:
        raise ValueError("a non-qualifying pattern needs n >= 2")
    rng = random.Random(seed)
    names = list(range(1, n + 1))
    rng.shuffle(names)
    edges = set()

    if qualifying:
        k = rng.randint(0, n)
        core_nodes, rest = names[:k], names[k:]
        path = [BETA] + core_nodes
        edges.update(zip(path, path[1:]))
        placed = _cyclic_part(rng, rest, path, edges)
        _extra_edges(rng, edges, path, placed, density)
    else:
        k = rng.randint(2, n)
        core_nodes, rest = names[:k], names[k:]
        order = [BETA] + core_nodes
        # a DAG on the core in which the last two nodes are unrelated sinks
        for idx in range(1, len(order)):
            v = order[idx]
            limit = idx if idx < len(order) - 1 else idx - 1
            preds = order[:limit]
            edges.add((rng.choice(preds), v))
        for a in range(len(order) - 2):
            for b in range(a + 1, len(order)):
                if b >= len(order) - 2 and a >= len(order) - 2:
                    continue
                if rng.random() < density:
                    edges.add((order[a], order[b]))
        edges.discard((order[-2], order[-1]))
        placed = _cyclic_part(rng, rest, order, edges) if rest else []
        _extra_edges(rng, edges, [], placed, density)
        for v in placed:
            for u in order:
                if rng.random() < density / 2:
                    edges.add((u, v))

    g = SparsityPattern(n, frozenset(edges))
    if decide_structural_avg_ctrl(g).verdict != qualifying:
        raise AssertionError(f"generator produced the wrong verdict for seed {seed!r}")
    return g


def format_edge_list(g: SparsityPattern, header: str = "") -> str:
    lines = [f"# {line}" for line in header.splitlines()] if header else []
    lines += [f"{node_label(u)} {node_label(v)}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"
