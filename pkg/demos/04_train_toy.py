#!/usr/bin/env python3
"""Ten-second learner shakedown on the one-step diagnostic task.

The environment forces the trigger and pays 1 - |a_my - 0.5|, so the
learner only has to steer the moment head onto 0.5. If this doesn't
converge, nothing downstream will.
"""

from perchrl.learner import SacHyperparams, train
from perchrl.toy_env import ToyTriggerEnv

hp = SacHyperparams(batch_size=64, buffer_capacity=10_000,
                    warmup_episodes=20, updates_per_step=16.0,
                    min_updates_per_episode=16, learning_starts=64,
                    lr=3e-3, beta_init=0.05,
                    target_entropy=-5.0, episodes=200, rolling_window=20)


def progress(ep, reward, rolling):
    print(f"episode {ep + 1:3d}: reward {reward:6.3f}  "
          f"rolling {rolling:6.3f}")


learner, stats = train(ToyTriggerEnv(), hp, seed=1, progress=progress)
hit = stats.first_episode_reaching(0.95)
print(f"\nrolling mean crossed 0.95 at episode {hit}; "
      f"final beta {stats.beta[-1]:.4f}, entropy {stats.entropy[-1]:.2f}")
