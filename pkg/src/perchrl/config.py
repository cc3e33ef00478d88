"""Human-readable flat key/value run configuration.

One layered config drives everything: vehicle, world, legs, cues, reward,
episode options, learner hyperparameters and sweep grid. The on-disk
format is plain ``key = value`` lines (SI units, '#' comments); every run
directory gets a fully resolved snapshot so it can reproduce itself.
Precedence is CLI overrides > config file > built-in defaults.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .env import EpisodeOptions, RewardParams
from .contact_legs import LegGeometry
from .learner import SacHyperparams
from .sensing import CueConfig
from .sim_core import MOMENT_MAX, VehicleParams, WorldParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SweepConfig:
    v_min: float = 1.5
    v_max: float = 3.5
    v_step: float = 0.25
    phi_min_deg: float = 25.0
    phi_max_deg: float = 90.0
    phi_step_deg: float = 5.0
    trials: int = 30

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("sweep trials must be >= 1")
        if self.v_step <= 0.0 or self.phi_step_deg <= 0.0:
            raise ValueError("sweep steps must be positive")

    def velocities(self) -> list[float]:
        return _grid(self.v_min, self.v_max, self.v_step)

    def angles_deg(self) -> list[float]:
        return _grid(self.phi_min_deg, self.phi_max_deg, self.phi_step_deg)


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(round((hi - lo) / step))
    return [lo + i * step for i in range(n + 1) if lo + i * step <= hi + 1e-9]


@dataclass(slots=True)
class RunConfig:
    seed: int = 0
    threshold: float = 0.0   # trigger threshold in squashed action space
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    world: WorldParams = field(default_factory=WorldParams)
    legs: LegGeometry = field(default_factory=LegGeometry)
    cues: CueConfig = field(default_factory=CueConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    episode: EpisodeOptions = field(default_factory=EpisodeOptions)
    sac: SacHyperparams = field(default_factory=SacHyperparams)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def default_config() -> RunConfig:
    return RunConfig()


# Flat schema: key -> (type tag, doc). Type tags: f float, i int, b bool,
# f? optional float ("none" allowed), ii comma-separated ints.
_SCHEMA: dict[str, tuple[str, str]] = {
    "seed": ("i", "master seed; all streams derive from it"),
    "threshold": ("f", "trigger threshold on the squashed trigger action"),
    "vehicle.mass": ("f", "kg"),
    "vehicle.inertia_yy": ("f", "kg m^2 about the pitch axis"),
    "vehicle.arm_length": ("f", "m, rotor pair offset (also the moment arm)"),
    "vehicle.max_thrust_per_pair": ("f", "N at full command"),
    "vehicle.motor_time_constant": ("f", "s, first-order rotor lag"),
    "world.ceiling_height": ("f", "m"),
    "world.gravity": ("f", "m/s^2"),
    "legs.fore_attach_x": ("f", "m, body frame"),
    "legs.fore_attach_z": ("f", "m, body frame"),
    "legs.hind_attach_x": ("f", "m, body frame"),
    "legs.hind_attach_z": ("f", "m, body frame"),
    "legs.leg_length": ("f", "m"),
    "legs.mount_angle_deg": ("f", "deg outward splay from the body plane"),
    "legs.body_radius": ("f", "m, body/prop collision circle"),
    "cues.tau_cap": ("f", "s, time-to-contact clip"),
    "cues.scale_tau": ("f", "network normalization scale"),
    "cues.scale_theta_x": ("f", "network normalization scale"),
    "cues.scale_d_ceil": ("f", "network normalization scale"),
    "cues.noise_std_tau": ("f", "s, additive sensor noise (0 = off)"),
    "cues.noise_std_theta_x": ("f", "1/s, additive sensor noise (0 = off)"),
    "cues.noise_std_d_ceil": ("f", "m, additive sensor noise (0 = off)"),
    "reward.c0": ("f", "1/m, proximity reward saturation"),
    "reward.c1": ("f", "1/s, trigger-timing reward saturation"),
    "reward.w_d": ("f", "weight of the proximity term"),
    "reward.w_tau": ("f", "weight of the timing term"),
    "reward.w_theta": ("f", "weight of the impact-angle term"),
    "reward.w_legs": ("f", "weight of the leg-contact term"),
    "reward.body_contact_divisor": ("f", "leg reward divisor on body contact"),
    "episode.dt_policy": ("f", "s, policy query period"),
    "episode.dt_physics": ("f", "s, integrator step"),
    "episode.pre_trigger_timeout": ("f", "s"),
    "episode.post_trigger_timeout": ("f", "s"),
    "episode.pinned_timeout": ("f", "s"),
    "episode.start_min": ("f", "m, minimum launch gap"),
    "episode.start_lead_time": ("f", "s of guaranteed approach"),
    "episode.start_margin": ("f", "m added to the lead distance"),
    "episode.v_min": ("f", "m/s, training launch speed range"),
    "episode.v_max": ("f", "m/s"),
    "episode.phi_min_deg": ("f", "deg, training flight angle range"),
    "episode.phi_max_deg": ("f", "deg"),
    "episode.sigma_mass": ("f", "kg, domain randomization std"),
    "episode.sigma_inertia": ("f", "kg m^2, domain randomization std"),
    "sac.gamma": ("f", "discount factor"),
    "sac.lr": ("f", "Adam learning rate (actor, critics, beta)"),
    "sac.batch_size": ("i", ""),
    "sac.buffer_capacity": ("i", "replay transitions"),
    "sac.polyak": ("f", "target smoothing rate"),
    "sac.updates_per_step": ("f", "gradient updates per env step"),
    "sac.min_updates_per_episode": ("i", "update floor for short episodes"),
    "sac.explore_fraction": ("f", "post-warmup forced-trigger episode share"),
    "sac.learning_starts": ("i", "transitions banked before updates begin"),
    "sac.warmup_episodes": ("i", "uniform-exploration episodes"),
    "sac.beta_init": ("f", "initial entropy coefficient"),
    "sac.auto_beta": ("b", "tune beta toward the target entropy"),
    "sac.target_entropy": ("f", "nats"),
    "sac.hidden": ("ii", "hidden layer widths"),
    "sac.episodes": ("i", "training episodes"),
    "sac.rolling_window": ("i", "episodes in the rolling reward mean"),
    "sac.early_stop_reward": ("f?", "stop once the rolling mean reaches this"),
    "sweep.v_min": ("f", "m/s"),
    "sweep.v_max": ("f", "m/s"),
    "sweep.v_step": ("f", "m/s"),
    "sweep.phi_min_deg": ("f", "deg"),
    "sweep.phi_max_deg": ("f", "deg"),
    "sweep.phi_step_deg": ("f", "deg"),
    "sweep.trials": ("i", "attempts per grid cell"),
}


def to_flat(cfg: RunConfig) -> dict:
    v, w, l, c, r = cfg.vehicle, cfg.world, cfg.legs, cfg.cues, cfg.reward
    e, s, sw = cfg.episode, cfg.sac, cfg.sweep
    return {
        "seed": cfg.seed,
        "threshold": cfg.threshold,
        "vehicle.mass": v.mass,
        "vehicle.inertia_yy": v.inertia_yy,
        "vehicle.arm_length": v.arm_length,
        "vehicle.max_thrust_per_pair": v.max_thrust_per_pair,
        "vehicle.motor_time_constant": v.motor_time_constant,
        "world.ceiling_height": w.ceiling_height,
        "world.gravity": w.gravity,
        "legs.fore_attach_x": l.fore_attach[0],
        "legs.fore_attach_z": l.fore_attach[1],
        "legs.hind_attach_x": l.hind_attach[0],
        "legs.hind_attach_z": l.hind_attach[1],
        "legs.leg_length": l.leg_length,
        "legs.mount_angle_deg": math.degrees(l.mount_angle),
        "legs.body_radius": l.body_radius,
        "cues.tau_cap": c.tau_cap,
        "cues.scale_tau": c.scale_tau,
        "cues.scale_theta_x": c.scale_theta_x,
        "cues.scale_d_ceil": c.scale_d_ceil,
        "cues.noise_std_tau": c.noise_std_tau,
        "cues.noise_std_theta_x": c.noise_std_theta_x,
        "cues.noise_std_d_ceil": c.noise_std_d_ceil,
        "reward.c0": r.c0,
        "reward.c1": r.c1,
        "reward.w_d": r.w_d,
        "reward.w_tau": r.w_tau,
        "reward.w_theta": r.w_theta,
        "reward.w_legs": r.w_legs,
        "reward.body_contact_divisor": r.body_contact_divisor,
        "episode.dt_policy": e.dt_policy,
        "episode.dt_physics": e.dt_physics,
        "episode.pre_trigger_timeout": e.pre_trigger_timeout,
        "episode.post_trigger_timeout": e.post_trigger_timeout,
        "episode.pinned_timeout": e.pinned_timeout,
        "episode.start_min": e.start_min,
        "episode.start_lead_time": e.start_lead_time,
        "episode.start_margin": e.start_margin,
        "episode.v_min": e.v_range[0],
        "episode.v_max": e.v_range[1],
        "episode.phi_min_deg": e.phi_range_deg[0],
        "episode.phi_max_deg": e.phi_range_deg[1],
        "episode.sigma_mass": e.sigma_mass,
        "episode.sigma_inertia": e.sigma_inertia,
        "sac.gamma": s.gamma,
        "sac.lr": s.lr,
        "sac.batch_size": s.batch_size,
        "sac.buffer_capacity": s.buffer_capacity,
        "sac.polyak": s.polyak,
        "sac.updates_per_step": s.updates_per_step,
        "sac.min_updates_per_episode": s.min_updates_per_episode,
        "sac.explore_fraction": s.explore_fraction,
        "sac.learning_starts": s.learning_starts,
        "sac.warmup_episodes": s.warmup_episodes,
        "sac.beta_init": s.beta_init,
        "sac.auto_beta": s.auto_beta,
        "sac.target_entropy": s.target_entropy,
        "sac.hidden": s.hidden,
        "sac.episodes": s.episodes,
        "sac.rolling_window": s.rolling_window,
        "sac.early_stop_reward": s.early_stop_reward,
        "sweep.v_min": sw.v_min,
        "sweep.v_max": sw.v_max,
        "sweep.v_step": sw.v_step,
        "sweep.phi_min_deg": sw.phi_min_deg,
        "sweep.phi_max_deg": sw.phi_max_deg,
        "sweep.phi_step_deg": sw.phi_step_deg,
        "sweep.trials": sw.trials,
    }


def from_flat(flat: dict) -> RunConfig:
    g = flat.get
    try:
        vehicle = VehicleParams(
            mass=g("vehicle.mass"), inertia_yy=g("vehicle.inertia_yy"),
            arm_length=g("vehicle.arm_length"),
            max_thrust_per_pair=g("vehicle.max_thrust_per_pair"),
            motor_time_constant=g("vehicle.motor_time_constant"))
        world = WorldParams(ceiling_height=g("world.ceiling_height"),
                            gravity=g("world.gravity"))
        legs = LegGeometry(
            fore_attach=(g("legs.fore_attach_x"), g("legs.fore_attach_z")),
            hind_attach=(g("legs.hind_attach_x"), g("legs.hind_attach_z")),
            leg_length=g("legs.leg_length"),
            mount_angle=math.radians(g("legs.mount_angle_deg")),
            body_radius=g("legs.body_radius"))
        cues = CueConfig(
            tau_cap=g("cues.tau_cap"), scale_tau=g("cues.scale_tau"),
            scale_theta_x=g("cues.scale_theta_x"),
            scale_d_ceil=g("cues.scale_d_ceil"),
            noise_std_tau=g("cues.noise_std_tau"),
            noise_std_theta_x=g("cues.noise_std_theta_x"),
            noise_std_d_ceil=g("cues.noise_std_d_ceil"))
        reward = RewardParams(
            c0=g("reward.c0"), c1=g("reward.c1"), w_d=g("reward.w_d"),
            w_tau=g("reward.w_tau"), w_theta=g("reward.w_theta"),
            w_legs=g("reward.w_legs"),
            body_contact_divisor=g("reward.body_contact_divisor"),
            gamma=g("sac.gamma"))
        episode = EpisodeOptions(
            dt_policy=g("episode.dt_policy"),
            dt_physics=g("episode.dt_physics"),
            pre_trigger_timeout=g("episode.pre_trigger_timeout"),
            post_trigger_timeout=g("episode.post_trigger_timeout"),
            pinned_timeout=g("episode.pinned_timeout"),
            start_min=g("episode.start_min"),
            start_lead_time=g("episode.start_lead_time"),
            start_margin=g("episode.start_margin"),
            v_range=(g("episode.v_min"), g("episode.v_max")),
            phi_range_deg=(g("episode.phi_min_deg"), g("episode.phi_max_deg")),
            sigma_mass=g("episode.sigma_mass"),
            sigma_inertia=g("episode.sigma_inertia"))
        sac = SacHyperparams(
            gamma=g("sac.gamma"), lr=g("sac.lr"),
            batch_size=g("sac.batch_size"),
            buffer_capacity=g("sac.buffer_capacity"),
            polyak=g("sac.polyak"),
            updates_per_step=g("sac.updates_per_step"),
            min_updates_per_episode=g("sac.min_updates_per_episode"),
            explore_fraction=g("sac.explore_fraction"),
            learning_starts=g("sac.learning_starts"),
            warmup_episodes=g("sac.warmup_episodes"),
            beta_init=g("sac.beta_init"), auto_beta=g("sac.auto_beta"),
            target_entropy=g("sac.target_entropy"),
            hidden=tuple(g("sac.hidden")), episodes=g("sac.episodes"),
            rolling_window=g("sac.rolling_window"),
            early_stop_reward=g("sac.early_stop_reward"))
        sweep = SweepConfig(
            v_min=g("sweep.v_min"), v_max=g("sweep.v_max"),
            v_step=g("sweep.v_step"), phi_min_deg=g("sweep.phi_min_deg"),
            phi_max_deg=g("sweep.phi_max_deg"),
            phi_step_deg=g("sweep.phi_step_deg"), trials=g("sweep.trials"))
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err)) from err
    return RunConfig(seed=g("seed"), threshold=g("threshold"),
                     vehicle=vehicle, world=world, legs=legs, cues=cues,
                     reward=reward, episode=episode, sac=sac, sweep=sweep)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def _parse_value(key: str, text: str):
    tag = _SCHEMA[key][0]
    text = text.strip()
    try:
        if tag == "f":
            return float(text)
        if tag == "i":
            return int(text)
        if tag == "b":
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        if tag == "f?":
            return None if text.lower() == "none" else float(text)
        if tag == "ii":
            return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {err}") from err
    raise ConfigError(f"unknown schema tag for {key}")


def config_to_text(cfg: RunConfig) -> str:
    flat = to_flat(cfg)
    lines = ["# perchrl run configuration (SI units unless noted)"]
    group = None
    for key in _SCHEMA:
        head = key.split(".")[0] if "." in key else ""
        if head != group:
            group = head
            lines.append("")
        doc = _SCHEMA[key][1]
        comment = f"  # {doc}" if doc else ""
        lines.append(f"{key} = {_format_value(flat[key])}{comment}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> RunConfig:
    flat = to_flat(default_config())
    flat.update(parse_overrides_text(text))
    return from_flat(flat)


def parse_overrides_text(text: str) -> dict:
    """Parse ``key = value`` lines into typed values; unknown keys error."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        out[key] = _parse_value(key, value)
    return out


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Defaults, optionally layered with a file and then typed overrides."""
    flat = to_flat(default_config())
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        flat.update(parse_overrides_text(text))
    if overrides:
        for key in overrides:
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
        flat.update(overrides)
    cfg = from_flat(flat)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    """Cross-field checks beyond the per-dataclass invariants."""
    problems = []
    r = cfg.reward
    wsum = r.w_d + r.w_tau + r.w_theta + r.w_legs
    if abs(wsum - 1.0) > 1e-9:
        problems.append(f"reward weights sum to {wsum}, expected 1.0")
    realizable = cfg.vehicle.arm_length * cfg.vehicle.max_thrust_per_pair
    if realizable < MOMENT_MAX:
        problems.append(
            f"front pair can realize at most {realizable} N m, below the "
            f"moment command range bound {MOMENT_MAX} N m")
    weight = cfg.vehicle.mass * cfg.world.gravity
    if weight > 2.0 * cfg.vehicle.max_thrust_per_pair:
        problems.append("vehicle cannot hover: weight exceeds total thrust")
    if not (abs(cfg.threshold) < 1.0):
        problems.append("trigger threshold must lie strictly inside (-1, 1)")
    if cfg.episode.v_range[0] > cfg.episode.v_range[1]:
        problems.append("episode v_min exceeds v_max")
    if not (0.0 < cfg.episode.phi_range_deg[0]
            <= cfg.episode.phi_range_deg[1] <= 90.0):
        problems.append("episode flight-angle range must lie in (0, 90] deg")
    if cfg.sweep.v_min > cfg.sweep.v_max:
        problems.append("sweep v_min exceeds v_max")
    if cfg.sweep.phi_min_deg > cfg.sweep.phi_max_deg:
        problems.append("sweep phi_min exceeds phi_max")
    if cfg.episode.dt_physics > cfg.episode.dt_policy:
        problems.append("dt_physics must not exceed dt_policy")
    if problems:
        raise ConfigError("; ".join(problems))


def build_env(cfg: RunConfig):
    from .env import LandingEnv
    return LandingEnv(vehicle=cfg.vehicle, world=cfg.world, legs=cfg.legs,
                      cues=cfg.cues, reward=cfg.reward, options=cfg.episode)
