"""Emulated visual landing cues, computed from simulator ground truth.

Three cues drive the landing policy: time-to-contact tau (vertical gap
over closure rate, the inverse of the looming rate a camera would see),
the translational flow cue theta_x (lateral speed over the gap), and the
raw gap d_ceil. Real hardware would estimate these onboard; here they are
derived from the true state, optionally with additive Gaussian noise.

Cue definitions (with d the gap to the ceiling):

    tau     = d / vz, clipped to [0, tau_cap]; tau_cap when vz <= 0
    theta_x = vx / d
    d_ceil  = d
"""

import math
from dataclasses import dataclass

import numpy as np

from .sim_core import RigidBodyState, WorldParams


@dataclass(frozen=True, slots=True)
class Observation:
    tau: float      # s
    theta_x: float  # 1/s
    d_ceil: float   # m

    def as_array(self) -> np.ndarray:
        return np.array([self.tau, self.theta_x, self.d_ceil])


@dataclass(frozen=True, slots=True)
class CueConfig:
    """Cue clipping, fixed network normalization scales, and noise."""

    tau_cap: float = 5.0
    scale_tau: float = 1.0
    scale_theta_x: float = 10.0
    scale_d_ceil: float = 2.0
    noise_std_tau: float = 0.0
    noise_std_theta_x: float = 0.0
    noise_std_d_ceil: float = 0.0

    def __post_init__(self):
        if self.tau_cap <= 0.0:
            raise ValueError("tau_cap must be positive")
        for s in (self.scale_tau, self.scale_theta_x, self.scale_d_ceil):
            if s <= 0.0:
                raise ValueError("normalization scales must be positive")

    @property
    def has_noise(self) -> bool:
        return (self.noise_std_tau > 0.0 or self.noise_std_theta_x > 0.0
                or self.noise_std_d_ceil > 0.0)

    def scales(self) -> np.ndarray:
        return np.array([self.scale_tau, self.scale_theta_x, self.scale_d_ceil])


def observe(state: RigidBodyState, world: WorldParams,
            cues: CueConfig = CueConfig(),
            rng: np.random.Generator | None = None) -> Observation:
    """Cue triple for the current state.

    Raises if the vehicle is at or above the ceiling plane; contact is the
    episode loop's business, not the sensor's.
    """
    d = world.ceiling_height - state.z
    if d <= 0.0:
        raise ValueError(f"vehicle at or above ceiling plane (gap {d} m)")

    if state.vz > 0.0:
        tau = min(d / state.vz, cues.tau_cap)
    else:
        tau = cues.tau_cap
    theta_x = state.vx / d

    if cues.has_noise and rng is not None:
        tau += cues.noise_std_tau * rng.standard_normal()
        theta_x += cues.noise_std_theta_x * rng.standard_normal()
        d += cues.noise_std_d_ceil * rng.standard_normal()
        tau = min(max(tau, 0.0), cues.tau_cap)
        d = max(d, 1e-6)

    for name, v in (("tau", tau), ("theta_x", theta_x), ("d_ceil", d)):
        if not math.isfinite(v):
            raise ValueError(f"non-finite cue {name}")
    return Observation(tau=tau, theta_x=theta_x, d_ceil=d)


def normalize(obs: Observation, cues: CueConfig = CueConfig()) -> np.ndarray:
    """Cue triple scaled to roughly unit range for the networks."""
    return np.array([obs.tau / cues.scale_tau,
                     obs.theta_x / cues.scale_theta_x,
                     obs.d_ceil / cues.scale_d_ceil])
