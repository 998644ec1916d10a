"""Read, validate and write an extended-XYZ trajectory."""

import numpy as np

from chemdu.core import Cell, Trajectory, displacement, make_frame, validate_trajectory
from chemdu.io import parse_extxyz, write_extxyz

# %% A two-frame water trajectory, the second frame stretched along x
pos = np.array([[0.0, 0.0, 0.0], [0.96, 0.0, 0.0], [-0.24, 0.93, 0.0]])
stretched = pos.copy()
stretched[1, 0] += 0.2
traj = Trajectory([make_frame(["O", "H", "H"], pos, energy=-14.2),
                   make_frame(["O", "H", "H"], stretched, energy=-14.0)])
print("violations:", validate_trajectory(traj))

# %% Serialise and parse back
data = write_extxyz(traj)
print(data.decode())
back, diag = parse_extxyz(data)
print("frames read:", diag.frame_count, "energies:", [f.energy for f in back])
print("per-atom displacement frame 1 -> 2:\n", displacement(back[0], back[1]))

# %% A periodic slab frame and a malformed file
slab = make_frame(["Cu"], [[0, 0, 0]], Cell(np.diag([2.55, 2.55, 20.0]), (True, True, False)))
print(write_extxyz([slab]).decode().splitlines()[1])
try:
    parse_extxyz(b"3\n\nO 0 0 0\nH 1 0 0\n")
except Exception as e:
    print(type(e).__name__, "->", e)
