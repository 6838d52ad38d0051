"""
An explicit certifying ensemble
================================

On a reduced graph an edge weighting ``nu`` with values ``a/L + b*sqrt2``
defines the ensemble entries ``|sigma|**nu(e)``.  Under the uniform
measure on [-1, 1] every column of the averaged controllability matrix is
a vector of moments ``1/(nu+1)``, and a chosen ``n x n`` block is
nonsingular.
"""

# %%
from pathlib import Path

import numpy as np

from avgctrl import build_certificate, certify_rank, column, parse_edge_list, reachable_set, reduce

fig1 = parse_edge_list(Path(__file__).with_name("fig1.txt").read_text())
cert = build_certificate(reduce(fig1)[0])
g, w = cert.graph, cert.weighting
print("L =", w.L, " l_max =", w.ell_max)
for row in w.table():
    print(row["edge"], row["nu"])

# %%
# reachable sets repeat with period L past the base index
for j in range(4, 10):
    print(j, sorted(reachable_set(g, j).members))

# %%
# the support of column j is exactly the reachable set
c4 = column(g, w, 4)
print(np.round(c4.values, 5), sorted(c4.support))

# %%
rc = certify_rank(g, w)
print("columns:", rc.selection.indices)
print("rank", rc.rank, "ratio %.2e" % rc.sv_ratio, "verdict", rc.verdict)
for ge in rc.groups:
    print("rows", ge.rows, "exponents", [str(x) for x in ge.nus], "cauchy det %.3e" % ge.det)
