#!/usr/bin/env python3
"""Train the full event-triggered landing policy.

Every episode launches from a random speed and angle with the inertial
parameters perturbed, so the learned trigger must generalize. Full
convergence takes a few thousand episodes (tens of minutes); pass a
smaller episode count for a quick look at the early learning curve.

    python demos/05_train_landing_policy.py [episodes] [out_dir]

Artifacts (checkpoint, stats.csv, episodes.jsonl, config snapshot) land
in out_dir (default runs/demo-train); resume-quality reproducibility via
the recorded seed.
"""

import sys

from perchrl.config import default_config
from perchrl.run import train_run

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
out_dir = sys.argv[2] if len(sys.argv) > 2 else "runs/demo-train"

cfg = default_config()
cfg.seed = 1
from dataclasses import replace
cfg.sac = replace(cfg.sac, episodes=episodes, early_stop_reward=0.7)


def progress(ep, reward, rolling):
    print(f"episode {ep + 1:4d}: reward {reward:5.3f}  rolling {rolling:5.3f}",
          flush=True)


print(f"training for up to {episodes} episodes (early stop once the "
      f"rolling-100 mean reaches 0.7); artifacts in {out_dir}/")
learner, stats = train_run(cfg, out_dir, progress=progress)

hit = stats.first_episode_reaching(0.7)
if hit is not None:
    print(f"\nconverged: rolling mean reached 0.7 at episode {hit}")
else:
    print(f"\nstopped at episode {stats.episode[-1] + 1} with rolling mean "
          f"{stats.rolling_mean[-1]:.3f}; train longer for convergence")
print(f"checkpoint: {out_dir}/checkpoint.bin")
