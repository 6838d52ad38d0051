"""Reading sparsity patterns from text.

The native format is one edge per line, ``u v``, with node tokens ``b`` (or
``beta``) and ``a1 .. aN``; ``#`` starts a comment.  A small subset of DOT
(``digraph { b -> a1; a1 -> a2 -> a3; }``) is also accepted.
"""
from __future__ import annotations

import re

from .graph import (
    BETA,
    BetaHasInNeighbor,
    DuplicateEdge,
    PatternError,
    SparsityPattern,
    node_label,
    parse_node,
    validate_pattern,
)

__all__ = ["GraphFileError", "parse_edge_list", "parse_dot", "read_pattern"]


class GraphFileError(PatternError):
    """A malformed graph file; ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message, line=None, cause=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.cause = cause

    @property
    def kind(self) -> str:
        return type(self.cause).__name__ if self.cause is not None else type(self).__name__


def _finish(pairs, n=None) -> SparsityPattern:
    """Validate ``(line, u, v)`` triples, attributing duplicates to their line."""
    seen = {}
    for line, u, v in pairs:
        if (u, v) in seen:
            raise GraphFileError(
                f"duplicate edge {node_label(u)} -> {node_label(v)} (first on line {seen[(u, v)]})",
                line, DuplicateEdge())
        seen[(u, v)] = line
        if v == BETA:
            exc = BetaHasInNeighbor(f"edge {node_label(u)} -> b enters the control node")
            raise GraphFileError(str(exc), line, exc)
    try:
        return validate_pattern([(u, v) for _, u, v in pairs], n)
    except PatternError as exc:
        raise GraphFileError(str(exc), None, exc) from None


def _node(token, line):
    try:
        return parse_node(token)
    except PatternError as exc:
        raise GraphFileError(str(exc), line, exc) from None


def parse_edge_list(text: str, n=None) -> SparsityPattern:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.replace(",", " ").split()
        if len(parts) != 2:
            raise GraphFileError(f"expected 'u v', got {raw.strip()!r}", lineno)
        pairs.append((lineno, _node(parts[0], lineno), _node(parts[1], lineno)))
    if not pairs:
        raise GraphFileError("no edges found")
    return _finish(pairs, n)


_DOT_HEAD = re.compile(r"^\s*(strict\s+)?digraph\b[^{]*\{", re.IGNORECASE)


def parse_dot(text: str, n=None) -> SparsityPattern:
    """Edges from ``a -> b`` statements, chains allowed; attributes are ignored."""
    m = _DOT_HEAD.search(text)
    if m is None:
        raise GraphFileError("expected 'digraph {'", 1)
    close = text.rfind("}")
    if close < m.end():
        raise GraphFileError("missing closing '}'")
    start_line = text.count("\n", 0, m.end()) + 1
    body = text[m.end():close]
    body = re.sub(r"/\*.*?\*/", lambda s: "\n" * s.group(0).count("\n"), body, flags=re.S)
    pairs = []
    for offset, raw in enumerate(body.split("\n")):
        lineno = start_line + offset
        line = re.sub(r"(//|#).*$", "", raw)
        line = re.sub(r"\[[^\]]*\]", "", line)
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if not stmt or "->" not in stmt:
                if stmt and not re.match(r"^(\w+\s*=|graph|node|edge)\b", stmt) and " " in stmt:
                    raise GraphFileError(f"cannot parse statement {stmt!r}", lineno)
                continue
            toks = [t.strip().strip('"') for t in stmt.split("->")]
            if any(not t for t in toks):
                raise GraphFileError(f"incomplete edge statement {stmt!r}", lineno)
            ids = [_node(t, lineno) for t in toks]
            pairs.extend((lineno, u, v) for u, v in zip(ids, ids[1:]))
    if not pairs:
        raise GraphFileError("no edges found")
    return _finish(pairs, n)


def read_pattern(path, fmt: str = "edges") -> tuple:
    """Return ``(pattern, raw_bytes)`` read from ``path``."""
    with open(path, "rb") as fh:
        data = fh.read()
    text = data.decode("utf-8")
    parser = parse_dot if fmt == "dot" else parse_edge_list
    return parser(text), data
