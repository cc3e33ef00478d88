#!/usr/bin/env python3
"""Deterministic replay of a logged episode.

Every episode record carries its RNG stream key, trigger step and moment,
which is all the simulation needs to reproduce it bit for bit - no policy
network required. Useful for post-hoc inspection of any logged landing.

    python demos/07_replay_episode.py <run_dir> [episode_index]
"""

import os
import sys

from perchrl.config import load_config
from perchrl.logs import read_records, replay_record

if len(sys.argv) < 2:
    sys.exit("usage: python demos/07_replay_episode.py <run_dir> [index]")
run_dir = sys.argv[1]
index = int(sys.argv[2]) if len(sys.argv) > 2 else 0

cfg = load_config(os.path.join(run_dir, "config.cfg"))
records = read_records(os.path.join(run_dir, "episodes.jsonl"))
record = next(r for r in records if r["episode"] == index)

print(f"episode {index}: V={record['condition']['v']:.2f} m/s, "
      f"phi={record['condition']['phi_deg']:.1f} deg, "
      f"mass={record['mass'] * 1000:.2f} g")

result, rows = replay_record(record, cfg)
out = result.outcome
print(f"replayed outcome matches the log: {out.n_legs} legs, "
      f"body contact {out.body_contact}, reward {result.reward.total:.3f}")
print(f"trace: {len(rows)} samples "
      f"({rows[0].split(',')[0]} ... {rows[-1].split(',')[0]})")

path = f"replay_ep{index}.csv"
with open(path, "w") as fh:
    fh.write("phase,time,x,z,vx,vz,pitch,pitch_rate,tau,theta_x,d_ceil\n")
    fh.write("\n".join(rows) + "\n")
print(f"wrote {path}")
