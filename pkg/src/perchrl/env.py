"""Episode orchestration: approach sampling, randomization, reward.

An episode launches the vehicle on a straight collision course with the
ceiling at a sampled speed and flight angle. The policy is queried at
100 Hz during the approach; pre-trigger flight is ideal constant velocity
(the tracking controller that would hold it is out of scope). The moment
the trigger fires, the whole open-loop flip, contact and swing rollout
runs to termination inside that step at the 1 kHz physics rate, and the
full episode reward comes back on the trigger transition - every other
transition carries a reward of exactly zero.

Reward components, each normalized to [0, 1]:

    r_d     = clip(1/|d_min|, 0, c0) / c0
    r_tau   = clip(1/|tau_trg - 0.2|, 0, c1) / c1
    r_theta = |theta_impact| / 120 deg, saturating at 1 beyond 120 deg
    r_legs  = 1.0 (3-4 legs), 0.5 (1-2 legs), 0 (none),
              divided by 3 whenever body or propeller contact occurred

    total = 0.05 r_d + 0.1 r_tau + 0.2 r_theta + 0.65 r_legs

Episodes that never trigger terminate on contact or timeout and score only
the proximity term r_d.
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import policy as policy_mod
from .contact_legs import (ContactKind, EpisodeTrace, LandingOutcome,
                           LegGeometry, TriggerInfo, attach_pin,
                           classify_outcome, detect_contact,
                           detect_pinned_contact, pinned_com,
                           pinned_com_velocity, pinned_pitch, step_pinned)
from .seeding import generator
from .sensing import CueConfig, Observation, normalize, observe
from .sim_core import (MOMENT_MAX, FlipController, MotorState, RigidBodyState,
                       VehicleParams, WorldParams, hover_trim,
                       interpolate_state, step_free_flight)


@dataclass(frozen=True, slots=True)
class ApproachCondition:
    """Launch speed (m/s) and flight angle (deg; 0 horizontal, 90 vertical)."""

    v: float
    phi_deg: float

    def __post_init__(self):
        if not (self.v > 0.0):
            raise ValueError("approach speed must be positive")
        if not (0.0 < self.phi_deg <= 90.0):
            raise ValueError("flight angle must be in (0, 90] degrees")

    def velocity(self) -> tuple[float, float]:
        phi = math.radians(self.phi_deg)
        return (self.v * math.cos(phi), self.v * math.sin(phi))


@dataclass(frozen=True, slots=True)
class RewardParams:
    c0: float = 10.0   # 1/m, proximity saturation
    c1: float = 20.0   # 1/s, trigger-timing saturation
    w_d: float = 0.05
    w_tau: float = 0.1
    w_theta: float = 0.2
    w_legs: float = 0.65
    body_contact_divisor: float = 3.0
    gamma: float = 0.999

    def __post_init__(self):
        if self.c0 <= 0.0 or self.c1 <= 0.0:
            raise ValueError("c0 and c1 must be positive")
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError("gamma must be in [0, 1)")
        if self.body_contact_divisor <= 0.0:
            raise ValueError("body_contact_divisor must be positive")


@dataclass(frozen=True, slots=True)
class RewardBreakdown:
    r_d: float
    r_tau: float
    r_theta: float
    r_legs: float
    total: float


_LEG_SCORE = {0: 0.0, 1: 0.5, 2: 0.5, 3: 1.0, 4: 1.0}


def episode_reward(outcome: LandingOutcome,
                   params: RewardParams = RewardParams()) -> RewardBreakdown:
    """Reward components and weighted total for a finished episode."""
    if outcome.d_min == 0.0:
        r_d = 1.0
    else:
        r_d = min(1.0 / abs(outcome.d_min), params.c0) / params.c0

    if outcome.triggered:
        gap = abs(outcome.tau_trg - 0.2)
        r_tau = 1.0 if gap == 0.0 else min(1.0 / gap, params.c1) / params.c1
        r_theta = min(abs(outcome.theta_impact) / 120.0, 1.0)
        r_legs = _LEG_SCORE[outcome.n_legs]
        if outcome.body_contact:
            r_legs /= params.body_contact_divisor
    else:
        r_tau = 0.0
        r_theta = 0.0
        r_legs = 0.0

    total = (params.w_d * r_d + params.w_tau * r_tau
             + params.w_theta * r_theta + params.w_legs * r_legs)
    return RewardBreakdown(r_d=r_d, r_tau=r_tau, r_theta=r_theta,
                           r_legs=r_legs, total=total)


def sample_approach(rng: np.random.Generator,
                    v_range: tuple[float, float] = (1.5, 3.5),
                    phi_range_deg: tuple[float, float] = (30.0, 90.0),
                    ) -> ApproachCondition:
    """Uniform launch condition over the training ranges."""
    v = rng.uniform(v_range[0], v_range[1])
    phi = rng.uniform(phi_range_deg[0], phi_range_deg[1])
    return ApproachCondition(v=v, phi_deg=phi)


def randomize_inertia(nominal: VehicleParams, rng: np.random.Generator,
                      sigma_mass: float = 0.5e-3,
                      sigma_inertia: float = 1.5e-6) -> VehicleParams:
    """Gaussian mass/inertia perturbation, redrawn until both stay positive."""
    mass = nominal.mass
    inertia = nominal.inertia_yy
    if sigma_mass > 0.0:
        for _ in range(1000):
            mass = nominal.mass + sigma_mass * rng.standard_normal()
            if mass > 0.0:
                break
        else:
            raise ValueError("could not draw a positive mass")
    if sigma_inertia > 0.0:
        for _ in range(1000):
            inertia = nominal.inertia_yy + sigma_inertia * rng.standard_normal()
            if inertia > 0.0:
                break
        else:
            raise ValueError("could not draw a positive inertia")
    return VehicleParams(
        mass=mass,
        inertia_yy=inertia,
        arm_length=nominal.arm_length,
        max_thrust_per_pair=nominal.max_thrust_per_pair,
        motor_time_constant=nominal.motor_time_constant,
    )


@dataclass(frozen=True, slots=True)
class EpisodeOptions:
    dt_policy: float = 0.01
    dt_physics: float = 0.001
    pre_trigger_timeout: float = 3.0
    post_trigger_timeout: float = 3.0
    pinned_timeout: float = 2.0
    start_min: float = 1.0        # m, minimum launch gap
    start_lead_time: float = 0.5  # s of approach guaranteed before contact
    start_margin: float = 0.3     # m added on top of the lead distance
    v_range: tuple[float, float] = (1.5, 3.5)
    phi_range_deg: tuple[float, float] = (30.0, 90.0)
    sigma_mass: float = 0.5e-3        # kg
    sigma_inertia: float = 1.5e-6     # kg m^2

    def start_gap(self, vz: float) -> float:
        return max(self.start_min, self.start_lead_time * vz + self.start_margin)


@dataclass(slots=True)
class Transition:
    obs: np.ndarray       # normalized cue triple
    action: np.ndarray    # squashed (a_trg, a_my)
    reward: float
    next_obs: np.ndarray
    done: bool
    trigger: bool


@dataclass(slots=True)
class EpisodeResult:
    condition: ApproachCondition
    mass: float
    inertia_yy: float
    trigger_step: int                  # -1 when the episode never triggered
    trigger_obs: Observation | None
    my: float                          # nan when never triggered
    outcome: LandingOutcome
    reward: RewardBreakdown


class LandingEnv:
    """Single-episode ceiling-approach environment.

    One instance runs one episode at a time: reset() samples (or accepts)
    the launch condition and the randomized inertial parameters, then
    step() consumes action samples until done. After termination the
    scored result is available as ``last_result``.
    """

    def __init__(self, vehicle: VehicleParams = VehicleParams(),
                 world: WorldParams = WorldParams(),
                 legs: LegGeometry = LegGeometry(),
                 cues: CueConfig = CueConfig(),
                 reward: RewardParams = RewardParams(),
                 options: EpisodeOptions = EpisodeOptions()):
        self.nominal = vehicle
        self.world = world
        self.legs = legs
        self.cues = cues
        self.reward_params = reward
        self.options = options
        self.collect_trace = False
        self.trace_rows: list[tuple] = []
        self._active = False
        self.last_result: EpisodeResult | None = None

    # -- episode lifecycle -------------------------------------------------

    def reset(self, rng: np.random.Generator,
              condition: ApproachCondition | None = None) -> Observation:
        opts = self.options
        # The condition draw happens unconditionally so the stream position
        # of every later draw is the same whether the condition was sampled
        # or prescribed; replaying a logged episode relies on this.
        sampled = sample_approach(rng, opts.v_range, opts.phi_range_deg)
        if condition is None:
            condition = sampled
        vehicle = randomize_inertia(self.nominal, rng,
                                    opts.sigma_mass, opts.sigma_inertia)
        # Sensor noise draws come from a derived stream so that replaying a
        # logged episode (which skips the policy's draws) still reproduces it.
        self._noise_rng = generator(int(rng.integers(2 ** 62)))

        vx, vz = condition.velocity()
        gap = opts.start_gap(vz)
        self._z_start = self.world.ceiling_height - gap
        state = RigidBodyState(
            x=0.0, z=self._z_start, vx=vx, vz=vz,
            pitch=0.0, pitch_rate=0.0,
            motors=hover_trim(vehicle, self.world), time=0.0,
        )

        self.condition = condition
        self.vehicle = vehicle
        self._state = state
        self._trace = EpisodeTrace(d_min=gap)
        self._step_count = 0
        self._active = True
        self.last_result = None
        self.trace_rows = []
        self._obs = self._observe(state)
        self._trace_row("approach", state)
        return self._obs

    def step(self, action: policy_mod.ActionSample
             ) -> tuple[Observation, float, bool]:
        if not self._active:
            raise RuntimeError("step() called on a finished episode")
        opts = self.options

        if action.trigger:
            trigger = TriggerInfo(triggered=True, tau_trg=self._obs.tau,
                                  trigger_time=self._state.time,
                                  moment=action.my)
            terminal_obs = self._run_flip(action.my)
            return self._finish(trigger, action, terminal_obs)

        prev = self._state
        dt = opts.dt_policy
        nxt = RigidBodyState(
            x=prev.x + prev.vx * dt, z=prev.z + prev.vz * dt,
            vx=prev.vx, vz=prev.vz, pitch=prev.pitch,
            pitch_rate=prev.pitch_rate, motors=prev.motors,
            time=prev.time + dt,
        )
        event = detect_contact(prev, nxt, self.legs, self.world)
        if event is not None:
            self._trace.events.append(event)
            f = self._fraction(prev, nxt, event.time)
            cstate = interpolate_state(prev, nxt, f)
            self._note_gap(cstate.z)
            self._trace_row("approach", cstate)
            trigger = TriggerInfo(triggered=False)
            return self._finish(trigger, action, self._observe(cstate))

        self._state = nxt
        self._note_gap(nxt.z)
        self._step_count += 1
        self._obs = self._observe(nxt)
        self._trace_row("approach", nxt)

        if nxt.time >= opts.pre_trigger_timeout:
            trigger = TriggerInfo(triggered=False)
            return self._finish(trigger, action, self._obs)
        return self._obs, 0.0, False

    # -- internals ----------------------------------------------------------

    def _finish(self, trigger: TriggerInfo, action: policy_mod.ActionSample,
                terminal_obs: Observation):
        self._trace.terminated = True
        outcome = classify_outcome(self._trace, trigger)
        breakdown = episode_reward(outcome, self.reward_params)
        self.last_result = EpisodeResult(
            condition=self.condition,
            mass=self.vehicle.mass,
            inertia_yy=self.vehicle.inertia_yy,
            trigger_step=self._step_count if trigger.triggered else -1,
            trigger_obs=self._obs if trigger.triggered else None,
            my=action.my if trigger.triggered else math.nan,
            outcome=outcome,
            reward=breakdown,
        )
        self._active = False
        return terminal_obs, breakdown.total, True

    def _run_flip(self, my: float) -> Observation:
        """Open-loop flip rollout to termination; returns the terminal obs."""
        opts = self.options
        state = self._state
        controller = FlipController(my, state.pitch, self.vehicle)
        deadline = state.time + opts.post_trigger_timeout
        escape_z = self._z_start - 0.5

        while True:
            cmd_front, cmd_rear = controller.commands(state)
            prev = state
            state = step_free_flight(prev, cmd_front, cmd_rear,
                                     self.vehicle, self.world, opts.dt_physics)
            event = detect_contact(prev, state, self.legs, self.world)
            if event is not None:
                self._trace.events.append(event)
                f = self._fraction(prev, state, event.time)
                cstate = interpolate_state(prev, state, f)
                self._note_gap(cstate.z)
                self._trace_row("flip", cstate)
                if event.kind is ContactKind.FORE_LEGS:
                    self._trace.fore_attached = True
                    pinned = attach_pin(event, cstate, self.vehicle, self.legs)
                    return self._run_pinned(pinned)
                return self._observe(cstate)

            self._note_gap(state.z)
            self._trace_row("flip", state)
            falling_away = (controller.cutoff and state.vz < 0.0
                            and state.z < escape_z)
            if falling_away or state.time >= deadline:
                return self._observe(state)

    def _run_pinned(self, p) -> Observation:
        opts = self.options
        sign0 = 1.0 if p.swing_rate > 0.0 else -1.0
        self._note_pinned(p)
        if p.swing_rate <= 0.0:
            # Rotation already moving away from inversion: immediate reversal.
            self._trace.swing_reversed = True
            return self._pinned_obs(p)
        deadline = p.time + opts.pinned_timeout

        while True:
            prev = p
            p = step_pinned(prev, self.vehicle, self.legs, self.world,
                            opts.dt_physics)
            event = detect_pinned_contact(prev, p, self.legs, self.world)
            if event is not None:
                self._trace.events.append(event)
                if event.kind is ContactKind.HIND_LEGS:
                    self._trace.hind_reached = True
                self._note_pinned(p)
                return self._pinned_obs(p)
            self._note_pinned(p)
            if p.swing_rate * sign0 <= 0.0:
                self._trace.swing_reversed = True
                return self._pinned_obs(p)
            if p.time >= deadline:
                return self._pinned_obs(p)

    def _pinned_obs(self, p) -> Observation:
        cx, cz = pinned_com(p)
        vx, vz = pinned_com_velocity(p)
        state = RigidBodyState(x=cx, z=cz, vx=vx, vz=vz,
                               pitch=pinned_pitch(p), pitch_rate=p.swing_rate,
                               motors=MotorState(), time=p.time)
        return self._observe(state)

    def _observe(self, state: RigidBodyState) -> Observation:
        return observe(state, self.world, self.cues, self._noise_rng)

    def _note_gap(self, z: float) -> None:
        gap = self.world.ceiling_height - z
        if gap < self._trace.d_min:
            self._trace.d_min = gap

    def _note_pinned(self, p) -> None:
        cx, cz = pinned_com(p)
        self._note_gap(cz)
        if self.collect_trace:
            vx, vz = pinned_com_velocity(p)
            self.trace_rows.append(
                ("pinned", p.time, cx, cz, vx, vz, pinned_pitch(p),
                 p.swing_rate))

    def _trace_row(self, phase: str, state: RigidBodyState) -> None:
        if self.collect_trace:
            self.trace_rows.append(
                (phase, state.time, state.x, state.z, state.vx, state.vz,
                 state.pitch, state.pitch_rate))

    @staticmethod
    def _fraction(prev, curr, t: float) -> float:
        span = curr.time - prev.time
        if span <= 0.0:
            return 0.0
        return min(max((t - prev.time) / span, 0.0), 1.0)

    def max_useful_trigger_step(self) -> int:
        """Policy steps until untriggered flight would reach the ceiling.

        Used by warmup exploration to spread forced trigger times over the
        whole approach window. Only valid after reset().
        """
        gap = self.world.ceiling_height - self._state.z - self.legs.body_radius
        vz = self._state.vz
        if vz <= 0.0:
            return int(self.options.pre_trigger_timeout / self.options.dt_policy)
        return max(1, int(gap / (vz * self.options.dt_policy)))


def scripted_action(trigger: bool, my: float = 0.0,
                    a_trg: float | None = None,
                    a_my: float | None = None) -> policy_mod.ActionSample:
    """Action sample with prescribed trigger flag and moment.

    Used by warmup exploration and episode replay, where the action does
    not come from the policy network. The squashed components default to
    values consistent with the flag and moment.
    """
    if a_trg is None:
        a_trg = 0.5 if trigger else -0.5
    if a_my is None:
        a_my = min(max(2.0 * my / MOMENT_MAX - 1.0, -1.0), 1.0)
    raw_trg = math.atanh(min(max(a_trg, -0.999999), 0.999999))
    raw_my = math.atanh(min(max(a_my, -0.999999), 0.999999))
    return policy_mod.ActionSample(
        raw=(raw_trg, raw_my), squashed=(a_trg, a_my),
        trigger=trigger, my=my, log_prob=0.0,
    )


def rollout_policy(env, net, rng: np.random.Generator,
                   threshold: float = 0.0, deterministic: bool = False,
                   condition: ApproachCondition | None = None,
                   collect_transitions: bool = False,
                   ) -> tuple[list[Transition], EpisodeResult]:
    """Run one episode under the policy network; returns its transitions
    (empty list unless requested) and the scored result."""
    if condition is not None:
        obs = env.reset(rng, condition=condition)
    else:
        obs = env.reset(rng)
    obs_n = normalize(obs, env.cues)
    transitions: list[Transition] = []
    while True:
        action = policy_mod.sample_action(net, obs_n, rng, threshold,
                                          deterministic=deterministic)
        next_obs, reward, done = env.step(action)
        next_obs_n = normalize(next_obs, env.cues)
        if collect_transitions:
            transitions.append(Transition(
                obs=obs_n, action=np.array(action.squashed), reward=reward,
                next_obs=next_obs_n, done=done, trigger=action.trigger,
            ))
        if done:
            return transitions, env.last_result
        obs_n = next_obs_n


def rollout_scripted(env, rng: np.random.Generator,
                     trigger_step: int | None, my: float | None,
                     condition: ApproachCondition | None = None,
                     collect_transitions: bool = False,
                     action_rng: np.random.Generator | None = None,
                     threshold: float = 0.0,
                     ) -> tuple[list[Transition], EpisodeResult]:
    """Run one episode with a forced trigger step and moment.

    Passing None for the trigger step or moment draws them uniformly
    (after reset, so the step range can reflect the sampled condition);
    this is the warmup exploration scheme. With ``action_rng`` given,
    the stored squashed actions are drawn uniformly (below the threshold
    before the trigger, above it at the trigger) so warmup transitions
    resemble the policy's action space; otherwise synthetic defaults are
    stored, which replay ignores anyway.
    """
    if condition is not None:
        obs = env.reset(rng, condition=condition)
    else:
        obs = env.reset(rng)
    if trigger_step is None:
        trigger_step = int(rng.integers(0, env.max_useful_trigger_step() + 1))
    if my is None:
        my = rng.uniform(0.0, MOMENT_MAX)
    obs_n = normalize(obs, env.cues)
    transitions: list[Transition] = []
    step = 0
    while True:
        fire = step == trigger_step
        if action_rng is not None:
            if fire:
                a_trg = action_rng.uniform(threshold, 1.0)
                action = scripted_action(True, my=my, a_trg=a_trg)
            else:
                a_trg = action_rng.uniform(-1.0, threshold)
                a_my = action_rng.uniform(-1.0, 1.0)
                action = scripted_action(False, a_trg=a_trg, a_my=a_my)
        else:
            action = scripted_action(fire, my=my if fire else 0.0)
        next_obs, reward, done = env.step(action)
        next_obs_n = normalize(next_obs, env.cues)
        if collect_transitions:
            transitions.append(Transition(
                obs=obs_n, action=np.array(action.squashed), reward=reward,
                next_obs=next_obs_n, done=done, trigger=action.trigger,
            ))
        if done:
            return transitions, env.last_result
        obs_n = next_obs_n
        step += 1
