"""
Deciding structural averaged controllability
=============================================

A sparsity pattern is a digraph on a control node ``b`` and state nodes
``a1..an``.  The test strips every node that sits on or below a cycle,
and asks whether what is left (the core) is a single path from ``b``.
"""

# %%
from avgctrl import decide_structural_avg_ctrl, node_label, parse_edge_list

fig1 = parse_edge_list("""
b a1
b a2
a1 a3
a2 a4
a4 a6
a6 a2
a6 a8
a3 a5
a5 a3
a5 a7
a7 a7
a7 a3
a7 a9
""")
d = decide_structural_avg_ctrl(fig1)

# %%
# six strong components, two of them with cycles
for comp, loopy in zip(d.scc.components, d.scc.nontrivial):
    print("cyclic " if loopy else "trivial", [node_label(v) for v in comp])

# %%
# everything downstream of a cycle is dropped; the core is b -> a1
print("core:", sorted(node_label(v) for v in d.core.nodes))
print("verdict:", d.verdict, "witness:", [node_label(v) for v in d.witness])

# %%
# two sinks side by side cannot lie on one path
star = parse_edge_list("b a1\nb a2\n")
ds = decide_structural_avg_ctrl(star)
print("star verdict:", ds.verdict, "obstruction:", [node_label(v) for v in ds.obstruction])

# %%
# joining the obstruction pair repairs it
fixed = parse_edge_list("b a1\nb a2\na1 a2\n")
print("with a1 -> a2:", decide_structural_avg_ctrl(fixed).verdict)
