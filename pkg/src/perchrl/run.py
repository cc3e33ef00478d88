"""High-level run orchestration shared by the CLI and the test suite.

A run directory always receives a fully resolved config snapshot, the
stats stream, the episode log and the final checkpoint, which together
reproduce the run bit-exactly from scratch.
"""

import os

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import RunConfig, build_env, config_from_text, config_to_text
from .env import ApproachCondition, rollout_policy
from .learner import SacLearner, TrainStats, train
from .logs import EpisodeLog
from .nets import DenseNet
from .seeding import episode_stream, generator
from .sweep import SweepGrid, run_sweep, write_policy_region_csv

CONFIG_NAME = "config.cfg"
STATS_NAME = "stats.csv"
EPISODES_NAME = "episodes.jsonl"
CHECKPOINT_NAME = "checkpoint.bin"


def save_learner_checkpoint(path: str, learner: SacLearner, cfg: RunConfig,
                            episode: int) -> None:
    meta = {
        "kind": "sac-learner",
        "episode": episode,
        "seed": cfg.seed,
        "threshold": cfg.threshold,
        "hidden": list(learner.hp.hidden),
        "cue_scales": [cfg.cues.scale_tau, cfg.cues.scale_theta_x,
                       cfg.cues.scale_d_ceil],
        "config_text": config_to_text(cfg),
    }
    save_checkpoint(path, learner.state_dict(), meta)


def load_learner_checkpoint(path: str) -> tuple[SacLearner, RunConfig, dict]:
    from dataclasses import replace

    arrays, meta = load_checkpoint(path)
    if "config_text" not in meta:
        raise CheckpointError(f"checkpoint {path} lacks an embedded config")
    cfg = config_from_text(meta["config_text"])
    hp = replace(cfg.sac, hidden=tuple(meta.get("hidden", cfg.sac.hidden)))
    learner = SacLearner(hp, generator(0, 0))
    try:
        learner.load_state_dict(arrays)
    except (KeyError, ValueError) as err:
        raise CheckpointError(f"checkpoint {path} does not match its "
                              f"metadata: {err}") from err
    return learner, cfg, meta


def load_policy_net(path: str) -> tuple[DenseNet, RunConfig, dict]:
    arrays, meta = load_checkpoint(path)
    if "config_text" not in meta:
        raise CheckpointError(f"checkpoint {path} lacks an embedded config")
    cfg = config_from_text(meta["config_text"])
    params = []
    i = 0
    while f"policy/p{i}" in arrays:
        params.append(arrays[f"policy/p{i}"])
        i += 1
    if not params:
        raise CheckpointError(f"checkpoint {path} holds no policy blocks")
    return DenseNet.from_params(params), cfg, meta


def train_run(cfg: RunConfig, out_dir: str, checkpoint_every: int = 500,
              progress=None) -> tuple[SacLearner, TrainStats]:
    """Full training run with all artifacts written into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CONFIG_NAME), "w") as fh:
        fh.write(config_to_text(cfg))

    env = build_env(cfg)
    seed = cfg.seed
    ckpt_path = os.path.join(out_dir, CHECKPOINT_NAME)

    def checkpoint_fn(learner, episode):
        save_learner_checkpoint(ckpt_path, learner, cfg, episode)

    with EpisodeLog(os.path.join(out_dir, EPISODES_NAME)) as log:
        def episode_sink(ep, result):
            log.append(ep, episode_stream(seed, ep), result)

        learner, stats = train(
            env, cfg.sac, seed, threshold=cfg.threshold,
            episode_sink=episode_sink, checkpoint_fn=checkpoint_fn,
            checkpoint_every=checkpoint_every, progress=progress)
    stats.to_csv(os.path.join(out_dir, STATS_NAME))
    return learner, stats


def eval_run(ckpt_path: str, v: float, phi_deg: float, n: int, seed: int,
             cfg: RunConfig | None = None, deterministic: bool = False,
             out_dir: str | None = None) -> dict:
    """Repeated attempts at one launch condition; returns outcome counts."""
    net, ckpt_cfg, _ = load_policy_net(ckpt_path)
    cfg = cfg or ckpt_cfg
    env = build_env(cfg)
    cond = ApproachCondition(v=v, phi_deg=phi_deg)

    log = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, CONFIG_NAME), "w") as fh:
            fh.write(config_to_text(cfg))
        log = EpisodeLog(os.path.join(out_dir, EPISODES_NAME))

    counts = {"four_leg": 0, "two_leg": 0, "zero": 0, "body_contact": 0}
    rewards = []
    try:
        for i in range(n):
            stream = episode_stream(seed, i)
            rng = generator(*stream)
            _, result = rollout_policy(env, net, rng, cfg.threshold,
                                       deterministic=deterministic,
                                       condition=cond)
            legs = result.outcome.n_legs
            if legs == 4:
                counts["four_leg"] += 1
            elif legs == 2:
                counts["two_leg"] += 1
            else:
                counts["zero"] += 1
            if result.outcome.body_contact:
                counts["body_contact"] += 1
            rewards.append(result.reward.total)
            if log is not None:
                log.append(i, stream, result)
    finally:
        if log is not None:
            log.close()
    counts["n"] = n
    counts["mean_reward"] = float(np.mean(rewards)) if rewards else 0.0
    return counts


def sweep_run(ckpt_path: str, out_dir: str, seed: int,
              cfg: RunConfig | None = None, workers: int = 1,
              trials: int | None = None, deterministic: bool = False):
    """Grid evaluation writing map.csv, map.json, policy_region.csv and the
    episode log into out_dir."""
    net, ckpt_cfg, _ = load_policy_net(ckpt_path)
    cfg = cfg or ckpt_cfg
    grid = SweepGrid.from_config(cfg.sweep)
    if trials is not None:
        grid = SweepGrid(velocities=grid.velocities,
                         angles_deg=grid.angles_deg, trials=trials)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, CONFIG_NAME), "w") as fh:
        fh.write(config_to_text(cfg))

    rate_map, records = run_sweep(net.params, grid, cfg, seed,
                                  workers=workers,
                                  deterministic=deterministic)
    rate_map.to_csv(os.path.join(out_dir, "map.csv"))
    rate_map.to_json(os.path.join(out_dir, "map.json"))
    write_policy_region_csv(os.path.join(out_dir, "policy_region.csv"), records)
    from .logs import record_to_line
    with open(os.path.join(out_dir, EPISODES_NAME), "w") as fh:
        for rec in records:
            fh.write(record_to_line(rec) + "\n")
    return rate_map, records
