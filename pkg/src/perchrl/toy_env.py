"""One-step diagnostic environment for exercising the learner.

The trigger is forced on the first step and the reward depends only on
the squashed moment action: reward = 1 - |a_my - 0.5|. A working learner
drives the moment head's mean toward atanh(0.5) and shrinks its spread,
pushing the mean episode reward toward 1. Useful as a fast sanity check
that the actor-critic plumbing optimizes anything at all.
"""

from dataclasses import dataclass

import numpy as np

from .policy import ActionSample
from .sensing import CueConfig, Observation


@dataclass(slots=True)
class ToyResult:
    reward: float
    a_my: float


class ToyTriggerEnv:
    """Single forced-trigger step; reward = 1 - |a_my - 0.5|."""

    OBS = Observation(tau=0.25, theta_x=0.0, d_ceil=0.5)

    def __init__(self, cues: CueConfig = CueConfig()):
        self.cues = cues
        self._active = False
        self.last_result: ToyResult | None = None

    def reset(self, rng: np.random.Generator) -> Observation:
        self._active = True
        self.last_result = None
        return self.OBS

    def max_useful_trigger_step(self) -> int:
        return 0

    def step(self, action: ActionSample) -> tuple[Observation, float, bool]:
        if not self._active:
            raise RuntimeError("step() called on a finished episode")
        a_my = action.squashed[1]
        reward = 1.0 - abs(a_my - 0.5)
        self._active = False
        self.last_result = ToyResult(reward=reward, a_my=a_my)
        return self.OBS, reward, True
