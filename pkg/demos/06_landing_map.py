#!/usr/bin/env python3
"""Landing-rate map of a trained policy over launch conditions.

Sweeps the (speed, angle) grid with repeated stochastic attempts per
cell and prints the four-leg success-rate map; also writes the CSV/JSON
artifacts next to the checkpoint's run directory.

    python demos/06_landing_map.py <checkpoint.bin> [trials] [out_dir]
"""

import os
import sys

from perchrl.run import sweep_run

if len(sys.argv) < 2:
    sys.exit("usage: python demos/06_landing_map.py <checkpoint.bin> "
             "[trials] [out_dir]")
ckpt = sys.argv[1]
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 30
out_dir = sys.argv[3] if len(sys.argv) > 3 else "runs/demo-sweep"

rate_map, records = sweep_run(ckpt, out_dir, seed=99, workers=os.cpu_count(),
                              trials=trials)

grid = rate_map.grid
print(f"\nfour-leg success rate out of {grid.trials} attempts per cell")
header = "V\\phi " + " ".join(f"{a:5.0f}" for a in grid.angles_deg)
print(header)
for iv, v in enumerate(grid.velocities):
    cells = " ".join(f"{rate_map.success_rate[iv, ia]:5.2f}"
                     for ia in range(len(grid.angles_deg)))
    print(f"{v:4.2f}  {cells}")

twoleg_share = rate_map.n_twoleg.sum() / max(
    (rate_map.n_twoleg + rate_map.n_fail).sum(), 1)
print(f"\nfailures ending as two-leg hangs: {100 * twoleg_share:.0f}%")
print(f"artifacts in {out_dir}/ (map.csv, map.json, policy_region.csv)")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(subplot_kw={"projection": "polar"},
                           figsize=(7, 5))
    phi = np.radians(grid.angles_deg)
    v = np.array(grid.velocities)
    pp, vv = np.meshgrid(phi, v)
    pcm = ax.pcolormesh(pp, vv, rate_map.success_rate, vmin=0, vmax=1,
                        cmap="viridis", shading="nearest")
    ax.set_thetamin(min(grid.angles_deg))
    ax.set_thetamax(max(grid.angles_deg))
    ax.set_xlabel("flight angle [deg] / speed [m/s]")
    fig.colorbar(pcm, label="four-leg landing rate")
    path = os.path.join(out_dir, "map.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    print(f"wrote {path}")
except ImportError:
    print("matplotlib not installed; skipping the plot")
