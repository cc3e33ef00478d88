"""Line-delimited episode records and deterministic replay.

Every episode appends one JSON object: launch condition, the randomized
inertial parameters, the trigger-time cues, the applied moment, the
landing outcome and the reward breakdown, plus the RNG stream key. That
is enough to re-simulate the episode exactly without the policy network:
replay re-derives the randomization from the stream key and re-enacts the
logged trigger step and moment.
"""

import json
import math

from .config import RunConfig, build_env
from .env import ApproachCondition, EpisodeResult, rollout_scripted
from .seeding import generator


class ReplayMismatch(RuntimeError):
    pass


def _nan_to_none(v: float):
    return None if isinstance(v, float) and math.isnan(v) else v


def result_to_record(episode: int, stream: tuple[int, ...],
                     result: EpisodeResult) -> dict:
    obs = result.trigger_obs
    out = result.outcome
    rew = result.reward
    return {
        "episode": episode,
        "stream": list(stream),
        "condition": {"v": result.condition.v,
                      "phi_deg": result.condition.phi_deg},
        "mass": result.mass,
        "inertia_yy": result.inertia_yy,
        "trigger_step": result.trigger_step,
        "trigger_obs": None if obs is None else {
            "tau": obs.tau, "theta_x": obs.theta_x, "d_ceil": obs.d_ceil},
        "my": _nan_to_none(result.my),
        "outcome": {
            "n_legs": out.n_legs,
            "body_contact": out.body_contact,
            "d_min": out.d_min,
            "tau_trg": _nan_to_none(out.tau_trg),
            "theta_impact": out.theta_impact,
            "triggered": out.triggered,
        },
        "reward": {"r_d": rew.r_d, "r_tau": rew.r_tau, "r_theta": rew.r_theta,
                   "r_legs": rew.r_legs, "total": rew.total},
    }


def record_to_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, allow_nan=False)


def read_records(path: str) -> list[dict]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


class EpisodeLog:
    """Append-only JSONL writer."""

    def __init__(self, path: str):
        self._fh = open(path, "w")

    def append(self, episode: int, stream: tuple[int, ...],
               result: EpisodeResult) -> None:
        self._fh.write(record_to_line(result_to_record(episode, stream,
                                                       result)) + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


TRACE_HEADER = "phase,time,x,z,vx,vz,pitch,pitch_rate,tau,theta_x,d_ceil"


def replay_record(record: dict, cfg: RunConfig,
                  collect_trace: bool = True) -> tuple[EpisodeResult, list[str]]:
    """Re-simulate a logged episode and verify it reproduces the log.

    Returns the fresh result and, when requested, per-step trace rows as
    CSV lines (ground-truth cues recomputed from the kinematics). Raises
    ReplayMismatch when the re-simulated outcome differs from the logged
    one, which happens if the config does not match the original run.
    """
    env = build_env(cfg)
    env.collect_trace = collect_trace
    rng = generator(*record["stream"])
    cond = ApproachCondition(v=record["condition"]["v"],
                             phi_deg=record["condition"]["phi_deg"])
    my = record["my"] if record["my"] is not None else 0.0
    _, result = rollout_scripted(env, rng, record["trigger_step"], my,
                                 condition=cond)

    fresh = result_to_record(record["episode"], tuple(record["stream"]), result)
    for key in ("mass", "inertia_yy", "outcome", "reward", "trigger_obs"):
        if fresh[key] != record[key]:
            raise ReplayMismatch(
                f"replayed {key} differs from log: {fresh[key]!r} vs "
                f"{record[key]!r} (wrong config for this log?)")

    rows = []
    if collect_trace:
        ceiling = cfg.world.ceiling_height
        cap = cfg.cues.tau_cap
        for phase, t, x, z, vx, vz, pitch, rate in env.trace_rows:
            d = ceiling - z
            tau = min(d / vz, cap) if (vz > 0.0 and d > 0.0) else cap
            theta_x = vx / d if d > 0.0 else 0.0
            rows.append(",".join(repr(v) if isinstance(v, float) else str(v)
                                 for v in (phase, t, x, z, vx, vz, pitch,
                                           rate, tau, theta_x, d)))
    return result, rows
