"""
Reducing a qualifying pattern
==============================

A qualifying pattern is thinned to a reduced graph: its skeleton is a
tree, the core is a path and every cyclic component hanging off the core
is a single cycle.  Each choice is recorded so the edge set can be replayed.
"""

# %%
from pathlib import Path

from avgctrl import node_label, parse_edge_list, reduce, validate_reduced

fig1 = parse_edge_list(Path(__file__).with_name("fig1.txt").read_text())
red, trace = reduce(fig1)
removed = sorted(fig1.edges - red.pattern.edges)
print("removed:", [(node_label(u), node_label(v)) for u, v in removed])
print("violations:", validate_reduced(red.pattern))

# %%
for step in trace.cycle_steps:
    print("component", [node_label(v) for v in step.component],
          "case", step.case, "entry", node_label(step.entry))
assert trace.replay() == red.pattern.edges

# %%
# the other tie-break keeps a7 -> a3 and drops a5 -> a3 instead
alt, _ = reduce(fig1, tie_break="max")
print("alternate removed:", [(node_label(u), node_label(v)) for u, v in sorted(fig1.edges - alt.pattern.edges)])

# %%
# the walk structure of the reduced graph
print("core path:", [node_label(v) for v in red.core_path])
print("cycles:", [[node_label(v) for v in c] for c in red.cycles])
print("depths:", dict((node_label(v), d) for v, d in enumerate(red.depth)))
