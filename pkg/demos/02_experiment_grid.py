"""The 77-obstacle avoidance grid seen through two drivers' parameters.

Prints the predicted risk per grid cell as a 7 x 11 table (rows from the
farthest column to the nearest, lateral offset across) for a driver who
discounts time slowly and for one who discounts it fast.
"""

import numpy as np

from podar import PodarParams, build_grid_scenarios, evaluate_scene

grid = build_grid_scenarios()
cfg = grid.config
print("lateral offsets (m):", " ".join(f"{y:+.2f}" for y in cfg.lateral))
print("main sequence:", ", ".join(grid.obstacle_ids[i] for i in grid.main_sequence))

drivers = {
    "slow discount (A=0.774, B=2.617)": PodarParams(7.0, 1.0, 0.774, 2.617),
    "fast discount (A=1.446, B=1.399)": PodarParams(7.0, 1.0, 1.446, 1.399),
}

for name, params in drivers.items():
    risk = np.array([evaluate_scene(s, params).final_podar for s in grid])
    table = risk.reshape(len(cfg.longitudinal), len(cfg.lateral)) / risk.max()
    print(f"\n{name}: risk relative to the grid maximum")
    for x, row in zip(cfg.longitudinal, table):
        print(f"{x:5.0f} m  " + " ".join(f"{v:5.3f}" for v in row))

# Mirrored cells agree exactly and the centered cell tops its column.
params = drivers["fast discount (A=1.446, B=1.399)"]
risk = {tuple(p): evaluate_scene(s, params).final_podar for p, s in zip(grid.positions, grid)}
print("\nmirror-symmetric:", all(risk[(x, -y)] == v for (x, y), v in risk.items()))
