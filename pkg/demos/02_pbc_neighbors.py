"""Minimum-image vectors and capped neighbor graphs under periodic boundaries."""

import numpy as np

from chemdu.core import Cell, make_frame
from chemdu.pbc import build_neighbor_graph, mic_displacement, tiling_extent

# %% The minimum image of a pair across the cell boundary
cell = Cell(np.eye(3) * 5.0, (True, True, True))
print("raw:", np.array([4.9, 0, 0]) - np.array([0.1, 0, 0]),
      "mic:", mic_displacement([0.1, 0, 0], [4.9, 0, 0], cell))

# %% A slab: images only in-plane, none along the open z direction
slab = Cell(np.diag([2.0, 2.0, 20.0]), (True, True, False))
g = build_neighbor_graph(make_frame(["Cu"], [[0, 0, 10]], slab), cutoff=2.5, k_cap=8)
for e in g.edges:
    print(f"{e.src} -> {e.dst} d={e.distance:.2f} shift={e.shift}")

# %% Cells shorter than the cutoff need several image layers
tiny = Cell(np.eye(3) * 1.0, (True, True, True))
print("tiling extent for a 1 Å cell and 2.5 Å cutoff:", tiling_extent(tiny, 2.5))
g = build_neighbor_graph(make_frame(["H"], [[0, 0, 0]], tiny), 2.5, k_cap=4)
print("kept edges (k_cap=4):", [(e.dst, e.shift) for e in g.edges])
