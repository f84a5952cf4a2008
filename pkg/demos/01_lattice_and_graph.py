"""
Building a quad-rail lattice
============================

A 2x2 lattice of macronodes, four modes each, built at two squeezing levels.
We look at the graph of the resulting pure state and project it onto a
square lattice.
"""

import numpy as np

from quadrail.gaussian import graph_from_state
from quadrail.lattice import MacronodeGrid, build_qrl, grid_to_dot, project_to_square_lattice, qrl_state

# 16 modes, pure, with the squeezing stated up front
state, grid = build_qrl(2, 2, 1.0)
print("modes:", state.n_modes, "pure:", state.is_pure())

# each interior mode couples to 16 neighbour modes with weight tanh(2r)/4
z = graph_from_state(qrl_state(MacronodeGrid(3, 3, 2.0))).Z
row = z[4 * 4].real  # first mode of the centre macronode
print("neighbour weights:", np.unique(np.round(np.abs(row[np.abs(row) > 1e-9]), 6)))
print("tanh(4)/4       :", round(np.tanh(4.0) / 4, 6))

# projection: measure three modes per macronode and keep a square lattice
state3, grid3 = build_qrl(3, 3, 3.0)
_, report = project_to_square_lattice(state3, grid3)
print("square-lattice edges:", len(report.lattice_edges), "weight:", round(report.expected_weight, 6))

# a DOT file for graphviz, one cluster per mode layer
with open("lattice.dot", "w") as fh:
    fh.write(grid_to_dot(grid))
print("wrote lattice.dot")
