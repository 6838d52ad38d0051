"""
Steering the ensemble average
==============================

Replace the parameter average with Gauss-Legendre quadrature, synthesize
a minimum-norm input for the discretized ensemble and integrate it.
These results hold for the quadrature-discretized ensemble, an
approximation of the continuum average.
"""

# %%
from pathlib import Path

import numpy as np

from avgctrl import build_certificate, discretize, parse_edge_list, reduce, simulate, synthesize_control
from avgctrl.simulator import write_trajectory_csv

fig1 = parse_edge_list(Path(__file__).with_name("fig1.txt").read_text())
ens = build_certificate(reduce(fig1)[0]).ensemble
target = np.eye(9)[8]

# %%
for N in (8, 16, 32, 64):
    de = discretize(ens, N)
    u = synthesize_control(de, np.zeros(9), target, 5.0)
    res = simulate(de, u, np.zeros(9), target=target)
    print(f"N={N:3d}  error {res.terminal_error:.2e}  max|u| {abs(u.u).max():.2e}"
          f"  cond(W) {u.gramian_condition:.1e}")

# %%
# the last trajectory, one row per control grid point
write_trajectory_csv(res, "steering_fig1.csv")
print(open("steering_fig1.csv").readline().strip())
