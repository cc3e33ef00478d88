"""perchrl: a desk-scale ceiling-perching laboratory.

Planar quadrotor flip-and-perch simulation with leg contact mechanics,
emulated visual landing cues, an event-triggered stochastic policy trained
by soft actor-critic, and a sweep harness that maps landing success over
launch conditions.
"""

from .config import RunConfig, default_config, load_config, validate_config
from .contact_legs import (ContactEvent, ContactKind, LandingOutcome,
                           LegGeometry, PinnedState, attach_pin,
                           classify_outcome, detect_contact, step_pinned)
from .env import (ApproachCondition, EpisodeOptions, LandingEnv, RewardParams,
                  Transition, episode_reward, randomize_inertia,
                  sample_approach)
from .learner import ReplayBuffer, SacHyperparams, SacLearner, TrainStats, train
from .nets import Adam, DenseNet, soft_update
from .policy import (ActionSample, moment_from_squashed, sample_action,
                     trigger_decision, trigger_probability)
from .sensing import CueConfig, Observation, normalize, observe
from .sim_core import (MOMENT_MAX, FlipController, MotorState, RigidBodyState,
                       VehicleParams, WorldParams, motor_step,
                       step_free_flight, wrap_to_pi)
from .sweep import LandingRateMap, SweepGrid, export_policy_region, run_sweep
from .toy_env import ToyTriggerEnv

__version__ = "0.1.0"
