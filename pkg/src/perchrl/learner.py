"""Soft actor-critic with delayed terminal credit.

Off-policy training of the two-head trigger policy: a uniform replay
buffer, twin Q critics with polyak-averaged targets, entropy-regularized
actor updates through the reparameterized sampler, and an optional
auto-tuned entropy coefficient. The full episode reward arrives on the
trigger transition (terminal), and the discount of gamma = 0.999 carries
that credit back through the zero-reward approach transitions via the
one-step bootstrapped critic targets.

All gradients come from the hand-rolled engine in nets.py; the test suite
pins every one of them against central finite differences.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import policy as policy_mod
from .env import Transition, rollout_policy, rollout_scripted
from .nets import Adam, DenseNet, soft_update
from .policy import head_backward, head_outputs, new_policy_net
from .seeding import LEARNER, NET_INIT, episode_stream, generator

OBS_DIM = 3
ACT_DIM = 2


class TrainingDiverged(RuntimeError):
    """Raised when a loss or target turns non-finite."""


@dataclass(frozen=True, slots=True)
class SacHyperparams:
    gamma: float = 0.999
    lr: float = 3e-4
    batch_size: int = 256
    buffer_capacity: int = 100_000
    polyak: float = 0.005
    updates_per_step: float = 2.0
    # Early policies trigger immediately, making episodes one step long
    # and starving the learner; the floor keeps updates flowing regardless.
    min_updates_per_episode: int = 60
    warmup_episodes: int = 500
    # Fraction of post-warmup episodes that keep using uniform forced
    # triggers, so the replay distribution never collapses onto a bad
    # policy's own narrow behavior.
    explore_fraction: float = 0.05
    # Gradient updates start once this many transitions are banked, which
    # is usually long before the warmup ends; the critic is then already
    # informed when the policy starts collecting its own data.
    learning_starts: int = 1000
    beta_init: float = 0.2
    auto_beta: bool = True
    target_entropy: float = -2.0     # nats, defaults to -action_dim
    hidden: tuple[int, ...] = (64, 64)
    episodes: int = 3000
    rolling_window: int = 100
    early_stop_reward: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError("gamma must be in [0, 1)")
        if not (0.0 < self.polyak <= 1.0):
            raise ValueError("polyak must be in (0, 1]")
        if self.beta_init < 0.0:
            raise ValueError("beta_init must be non-negative")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("need buffer_capacity >= batch_size >= 1")


@dataclass(slots=True)
class Batch:
    obs: np.ndarray
    act: np.ndarray
    rew: np.ndarray
    next_obs: np.ndarray
    done: np.ndarray      # float 0/1
    trigger: np.ndarray   # bool


class ReplayBuffer:
    """Fixed-capacity ring buffer with uniform sampling (with replacement)."""

    def __init__(self, capacity: int, obs_dim: int = OBS_DIM,
                 act_dim: int = ACT_DIM):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.trigger = np.zeros(capacity, dtype=bool)
        self.size = 0
        self.cursor = 0

    def push(self, t: Transition) -> None:
        i = self.cursor
        self.obs[i] = t.obs
        self.act[i] = t.action
        self.rew[i] = t.reward
        self.next_obs[i] = t.next_obs
        self.done[i] = 1.0 if t.done else 0.0
        self.trigger[i] = t.trigger
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator) -> Batch:
        if self.size < n:
            raise ValueError(f"buffer holds {self.size} < batch size {n}")
        idx = rng.integers(0, self.size, size=n)
        return Batch(obs=self.obs[idx], act=self.act[idx], rew=self.rew[idx],
                     next_obs=self.next_obs[idx], done=self.done[idx],
                     trigger=self.trigger[idx])


class SacLearner:
    """Owns the policy, twin critics, targets, optimizers and entropy coef."""

    def __init__(self, hp: SacHyperparams, rng: np.random.Generator):
        self.hp = hp
        self.policy_net = new_policy_net(rng, hp.hidden)
        qsizes = (OBS_DIM + ACT_DIM, *hp.hidden, 1)
        self.q1 = DenseNet(qsizes, rng)
        self.q2 = DenseNet(qsizes, rng)
        self.q1_target = self.q1.copy()
        self.q2_target = self.q2.copy()
        self.opt_policy = Adam(self.policy_net.params, lr=hp.lr)
        self.opt_q1 = Adam(self.q1.params, lr=hp.lr)
        self.opt_q2 = Adam(self.q2.params, lr=hp.lr)
        self.log_beta = np.array(math.log(max(hp.beta_init, 1e-12)))
        self.opt_beta = Adam([self.log_beta], lr=hp.lr)
        self.updates_done = 0

    @property
    def beta(self) -> float:
        return float(np.exp(self.log_beta))

    # -- update steps --------------------------------------------------------

    def critic_targets(self, batch: Batch,
                       rng: np.random.Generator) -> np.ndarray:
        """One-step bootstrapped targets; terminal transitions keep y = r."""
        mu, log_sigma, _, _, _ = head_outputs(self.policy_net, batch.next_obs)
        xi = rng.standard_normal(mu.shape)
        _, a_next, logp_next = policy_mod.squash_and_logprob(mu, log_sigma, xi)
        qin = np.concatenate([batch.next_obs, a_next], axis=1)
        q1t = self.q1_target.forward(qin)[:, 0]
        q2t = self.q2_target.forward(qin)[:, 0]
        soft_value = np.minimum(q1t, q2t) - self.beta * logp_next
        y = batch.rew + self.hp.gamma * (1.0 - batch.done) * soft_value
        if not np.all(np.isfinite(y)):
            bad = int(np.flatnonzero(~np.isfinite(y))[0])
            raise TrainingDiverged(
                f"non-finite critic target at batch row {bad}: "
                f"r={batch.rew[bad]}, done={batch.done[bad]}, "
                f"q1t={q1t[bad]}, q2t={q2t[bad]}, logp={logp_next[bad]}")
        return y

    def critic_update(self, batch: Batch,
                      rng: np.random.Generator) -> tuple[float, float]:
        y = self.critic_targets(batch, rng)
        qin = np.concatenate([batch.obs, batch.act], axis=1)
        n = len(y)
        losses = []
        for net, opt in ((self.q1, self.opt_q1), (self.q2, self.opt_q2)):
            q, cache = net.forward_cached(qin)
            diff = q[:, 0] - y
            losses.append(float(np.mean(diff ** 2)))
            grads, _ = net.backward(cache, (2.0 / n) * diff[:, None])
            opt.step(net.params, grads)
        return losses[0], losses[1]

    def actor_update(self, batch: Batch,
                     rng: np.random.Generator) -> tuple[float, float]:
        """Ascend E[min Q(o, a) - beta log pi(a|o)] via reparameterization.

        Returns (actor loss, entropy estimate). Also tunes beta toward the
        target entropy when auto_beta is on.
        """
        obs = batch.obs
        n = obs.shape[0]
        mu, log_sigma, _, cache, clamp_mask = head_outputs(self.policy_net, obs)
        xi = rng.standard_normal(mu.shape)
        sigma = np.exp(log_sigma)
        u = mu + sigma * xi
        a = np.tanh(u)
        one_m_a2 = 1.0 - a * a
        guard = one_m_a2 + policy_mod.TANH_EPS
        logp = (-0.5 * xi ** 2 - log_sigma - 0.5 * math.log(2.0 * math.pi)
                - np.log(guard)).sum(axis=1)

        qin = np.concatenate([obs, a], axis=1)
        q1v, c1 = self.q1.forward_cached(qin)
        q2v, c2 = self.q2.forward_cached(qin)
        pick1 = (q1v <= q2v).astype(float)
        qmin = np.minimum(q1v, q2v)[:, 0]

        beta = self.beta
        loss = float(np.mean(beta * logp - qmin))
        if not math.isfinite(loss):
            raise TrainingDiverged(f"non-finite actor loss {loss}")

        din1 = self.q1.input_gradient(c1, -pick1 / n)
        din2 = self.q2.input_gradient(c2, -(1.0 - pick1) / n)
        dq_da = (din1 + din2)[:, OBS_DIM:]

        dL_da = (beta / n) * (2.0 * a / guard) + dq_da
        d_mu = dL_da * one_m_a2
        d_logsig = dL_da * one_m_a2 * sigma * xi - (beta / n)
        grads = head_backward(self.policy_net, cache, d_mu, d_logsig,
                              clamp_mask)
        self.opt_policy.step(self.policy_net.params, grads)

        mean_logp = float(np.mean(logp))
        if self.hp.auto_beta:
            self.beta_update(mean_logp)
        return loss, -mean_logp

    def beta_update(self, mean_logp: float) -> None:
        """One Adam step on log beta toward the target entropy."""
        grad = -self.beta * (mean_logp + self.hp.target_entropy)
        if not math.isfinite(grad):
            raise TrainingDiverged(f"non-finite beta gradient {grad}")
        self.opt_beta.step([self.log_beta], [np.array(grad)])

    def soft_update_targets(self) -> None:
        soft_update(self.q1_target.params, self.q1.params, self.hp.polyak)
        soft_update(self.q2_target.params, self.q2.params, self.hp.polyak)

    def update(self, batch: Batch, rng: np.random.Generator) -> dict:
        c1, c2 = self.critic_update(batch, rng)
        actor_loss, entropy = self.actor_update(batch, rng)
        self.soft_update_targets()
        self.updates_done += 1
        return {"critic1_loss": c1, "critic2_loss": c2,
                "actor_loss": actor_loss, "entropy": entropy,
                "beta": self.beta}

    # -- checkpoint state -----------------------------------------------------

    def state_dict(self) -> dict[str, np.ndarray]:
        state: dict[str, np.ndarray] = {}
        nets = {"policy": self.policy_net, "q1": self.q1, "q2": self.q2,
                "q1_target": self.q1_target, "q2_target": self.q2_target}
        for name, net in nets.items():
            for i, p in enumerate(net.params):
                state[f"{name}/p{i}"] = p
        opts = {"policy": self.opt_policy, "q1": self.opt_q1,
                "q2": self.opt_q2, "beta": self.opt_beta}
        for name, opt in opts.items():
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                state[f"adam_{name}/m{i}"] = m
                state[f"adam_{name}/v{i}"] = v
            state[f"adam_{name}/t"] = np.array(float(opt.t))
        state["log_beta"] = self.log_beta
        state["updates_done"] = np.array(float(self.updates_done))
        return state

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        nets = {"policy": self.policy_net, "q1": self.q1, "q2": self.q2,
                "q1_target": self.q1_target, "q2_target": self.q2_target}
        for name, net in nets.items():
            net.set_params([state[f"{name}/p{i}"]
                            for i in range(len(net.params))])
        opts = {"policy": self.opt_policy, "q1": self.opt_q1,
                "q2": self.opt_q2, "beta": self.opt_beta}
        for name, opt in opts.items():
            for i in range(len(opt.m)):
                opt.m[i][...] = state[f"adam_{name}/m{i}"]
                opt.v[i][...] = state[f"adam_{name}/v{i}"]
            opt.t = int(state[f"adam_{name}/t"])
        self.log_beta[...] = state["log_beta"]
        self.updates_done = int(state["updates_done"])


@dataclass(slots=True)
class TrainStats:
    """Per-episode training record, streamed to CSV by the runner."""

    window: int = 100
    episode: list[int] = field(default_factory=list)
    reward: list[float] = field(default_factory=list)
    rolling_mean: list[float] = field(default_factory=list)
    critic1_loss: list[float] = field(default_factory=list)
    critic2_loss: list[float] = field(default_factory=list)
    actor_loss: list[float] = field(default_factory=list)
    entropy: list[float] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)

    CSV_HEADER = ("episode,reward,rolling_mean,critic1_loss,critic2_loss,"
                  "actor_loss,entropy,beta")

    def add(self, episode: int, reward: float, rolling: float,
            info: dict | None) -> None:
        self.episode.append(episode)
        self.reward.append(reward)
        self.rolling_mean.append(rolling)
        info = info or {}
        self.critic1_loss.append(info.get("critic1_loss", math.nan))
        self.critic2_loss.append(info.get("critic2_loss", math.nan))
        self.actor_loss.append(info.get("actor_loss", math.nan))
        self.entropy.append(info.get("entropy", math.nan))
        self.beta.append(info.get("beta", math.nan))

    def csv_row(self, i: int) -> str:
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in (
            self.episode[i], self.reward[i], self.rolling_mean[i],
            self.critic1_loss[i], self.critic2_loss[i], self.actor_loss[i],
            self.entropy[i], self.beta[i]))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for i in range(len(self.episode)):
                fh.write(self.csv_row(i) + "\n")

    def first_episode_reaching(self, level: float) -> int | None:
        """First episode whose rolling mean meets the level, if any."""
        for ep, rm in zip(self.episode, self.rolling_mean):
            if rm >= level:
                return ep
        return None


def train(env, hp: SacHyperparams, seed: int, *, threshold: float = 0.0,
          episode_sink=None, checkpoint_fn=None, checkpoint_every: int = 0,
          progress=None) -> tuple[SacLearner, TrainStats]:
    """Train a policy on an episodic environment.

    Runs hp.episodes rollouts (the first hp.warmup_episodes with uniform
    forced-trigger exploration, the rest with the stochastic policy),
    pushing every transition to replay and performing
    round(steps * updates_per_step) gradient updates after each
    post-warmup episode. Fully deterministic for a given seed.

    Optional hooks: ``episode_sink(episode, result)`` per episode,
    ``checkpoint_fn(learner, episode)`` every ``checkpoint_every`` episodes
    and on divergence, ``progress(episode, reward, rolling)`` every 50
    episodes.
    """
    learner = SacLearner(hp, generator(seed, NET_INIT))
    learner_rng = generator(seed, LEARNER)
    buffer = ReplayBuffer(hp.buffer_capacity)
    stats = TrainStats(window=hp.rolling_window)
    recent: deque[float] = deque(maxlen=hp.rolling_window)

    for ep in range(hp.episodes):
        ep_rng = generator(*episode_stream(seed, ep))
        scripted = ep < hp.warmup_episodes
        if not scripted and hp.explore_fraction > 0.0:
            scripted = ep_rng.uniform() < hp.explore_fraction
        if scripted:
            transitions, result = rollout_scripted(
                env, ep_rng, None, None, collect_transitions=True,
                action_rng=ep_rng, threshold=threshold)
        else:
            transitions, result = rollout_policy(
                env, learner.policy_net, ep_rng, threshold,
                collect_transitions=True)
        for t in transitions:
            buffer.push(t)
        ep_reward = transitions[-1].reward
        recent.append(ep_reward)
        rolling = sum(recent) / len(recent)

        info = None
        if buffer.size >= max(hp.batch_size, hp.learning_starts):
            n_upd = max(hp.min_updates_per_episode,
                        round(len(transitions) * hp.updates_per_step))
            try:
                for _ in range(n_upd):
                    batch = buffer.sample(hp.batch_size, learner_rng)
                    info = learner.update(batch, learner_rng)
            except TrainingDiverged:
                if checkpoint_fn is not None:
                    checkpoint_fn(learner, ep)
                raise
        stats.add(ep, ep_reward, rolling, info)

        if episode_sink is not None:
            episode_sink(ep, result)
        if checkpoint_fn is not None and checkpoint_every > 0 \
                and (ep + 1) % checkpoint_every == 0:
            checkpoint_fn(learner, ep)
        if progress is not None and (ep + 1) % 50 == 0:
            progress(ep, ep_reward, rolling)
        if (hp.early_stop_reward is not None
                and len(recent) >= hp.rolling_window
                and rolling >= hp.early_stop_reward):
            break

    if checkpoint_fn is not None:
        checkpoint_fn(learner, stats.episode[-1])
    return learner, stats
