"""Two-head squashed-Gaussian actor with threshold event triggering.

The network maps the normalized cue triple to four head outputs
(mu_trg, log_sigma_trg, mu_my, log_sigma_my). Both heads are sampled as
Gaussians, squashed through tanh into [-1, 1], and share the standard
squashed-density log-probability correction. The trigger fires when the
squashed trigger value strictly exceeds a fixed threshold; the moment head
is rescaled from [-1, 1] to [0, MOMENT_MAX] N m.
"""

import math
from dataclasses import dataclass

import numpy as np

from .nets import DenseNet
from .sim_core import MOMENT_MAX

LOG_SIGMA_MIN = -20.0
LOG_SIGMA_MAX = 2.0
TANH_EPS = 1e-6
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Head output column layout of the policy network.
COL_MU_TRG, COL_LOGSIG_TRG, COL_MU_MY, COL_LOGSIG_MY = range(4)
_MU_COLS = (COL_MU_TRG, COL_MU_MY)
_SIG_COLS = (COL_LOGSIG_TRG, COL_LOGSIG_MY)


@dataclass(frozen=True, slots=True)
class ActionSample:
    """One draw from both heads.

    ``raw`` are the pre-squash Gaussian draws (trigger, moment), ``squashed``
    their tanh images, ``my`` the rescaled moment in N m, and ``log_prob``
    the joint squashed-density log-probability of the draw.
    """

    raw: tuple[float, float]
    squashed: tuple[float, float]
    trigger: bool
    my: float
    log_prob: float


def new_policy_net(rng: np.random.Generator,
                   hidden: tuple[int, ...] = (64, 64)) -> DenseNet:
    # Small head init keeps early means near zero and sigmas near one.
    return DenseNet((3, *hidden, 4), rng, out_scale=1e-3)


def head_outputs(net: DenseNet, obs_n: np.ndarray):
    """Means and clamped log-sigmas for a batch of normalized observations.

    Returns (mu, log_sigma, raw_out, cache, clamp_mask); mu and log_sigma
    have shape (B, 2) ordered (trigger, moment). The cache and mask feed
    head_backward().
    """
    obs_n = np.atleast_2d(np.asarray(obs_n, dtype=float))
    if not np.all(np.isfinite(obs_n)):
        raise ValueError("non-finite observation fed to policy")
    for p in net.params:
        if not np.all(np.isfinite(p)):
            raise ValueError("non-finite policy parameter")
    out, cache = net.forward_cached(obs_n)
    mu = out[:, _MU_COLS]
    raw_logsig = out[:, _SIG_COLS]
    log_sigma = np.clip(raw_logsig, LOG_SIGMA_MIN, LOG_SIGMA_MAX)
    clamp_mask = (raw_logsig > LOG_SIGMA_MIN) & (raw_logsig < LOG_SIGMA_MAX)
    return mu, log_sigma, out, cache, clamp_mask


def head_backward(net: DenseNet, cache, d_mu: np.ndarray, d_logsig: np.ndarray,
                  clamp_mask: np.ndarray):
    """Backpropagate head-output gradients into network parameter gradients."""
    d_out = np.zeros((d_mu.shape[0], 4))
    d_out[:, _MU_COLS] = d_mu
    d_out[:, _SIG_COLS] = d_logsig * clamp_mask
    grads, _ = net.backward(cache, d_out)
    return grads


def squash_and_logprob(mu: np.ndarray, log_sigma: np.ndarray, xi: np.ndarray):
    """Reparameterized draw u = mu + sigma * xi, squashed, with log-prob.

    Returns (u, a, log_prob) where log_prob has shape (B,) and includes
    the tanh change-of-variables correction with a small epsilon guard.
    """
    sigma = np.exp(log_sigma)
    u = mu + sigma * xi
    a = np.tanh(u)
    log_gauss = -0.5 * ((u - mu) / sigma) ** 2 - log_sigma - _LOG_SQRT_2PI
    correction = np.log(1.0 - a * a + TANH_EPS)
    return u, a, (log_gauss - correction).sum(axis=1)


def log_prob_of_raw(mu: np.ndarray, log_sigma: np.ndarray,
                    u: np.ndarray) -> np.ndarray:
    """Joint squashed log-density of fixed pre-squash draws u, shape (B,)."""
    sigma = np.exp(log_sigma)
    a = np.tanh(u)
    log_gauss = -0.5 * ((u - mu) / sigma) ** 2 - log_sigma - _LOG_SQRT_2PI
    correction = np.log(1.0 - a * a + TANH_EPS)
    return (log_gauss - correction).sum(axis=1)


def moment_from_squashed(a_my: float) -> float:
    """Rescale a squashed moment action to [0, MOMENT_MAX] N m."""
    return 0.5 * MOMENT_MAX * (a_my + 1.0)


def trigger_decision(a_trg: float, threshold: float) -> bool:
    """Strict squashed-space comparison; equality does not trigger."""
    if not (abs(threshold) < 1.0):
        raise ValueError(f"threshold must lie strictly inside (-1, 1), got {threshold}")
    return a_trg > threshold


def trigger_probability(mu_trg: float, sigma_trg: float,
                        threshold: float) -> float:
    """P(tanh(u) > threshold) for u ~ N(mu, sigma^2)."""
    if not (abs(threshold) < 1.0):
        raise ValueError(f"threshold must lie strictly inside (-1, 1), got {threshold}")
    zscore = (math.atanh(threshold) - mu_trg) / sigma_trg
    return 0.5 * math.erfc(zscore / math.sqrt(2.0))


def sample_action(net: DenseNet, obs_n: np.ndarray, rng: np.random.Generator,
                  threshold: float = 0.0,
                  deterministic: bool = False) -> ActionSample:
    """Draw one action for a single normalized observation.

    ``deterministic`` replaces the draw with the head means (the log-prob
    is still evaluated at that point).
    """
    mu, log_sigma, _, _, _ = head_outputs(net, obs_n)
    if deterministic:
        xi = np.zeros((1, 2))
    else:
        xi = rng.standard_normal((1, 2))
    u, a, logp = squash_and_logprob(mu, log_sigma, xi)
    a_trg, a_my = float(a[0, 0]), float(a[0, 1])
    return ActionSample(
        raw=(float(u[0, 0]), float(u[0, 1])),
        squashed=(a_trg, a_my),
        trigger=trigger_decision(a_trg, threshold),
        my=moment_from_squashed(a_my),
        log_prob=float(logp[0]),
    )


def sample_squashed_batch(mu: np.ndarray, log_sigma: np.ndarray, n: int,
                          rng: np.random.Generator) -> np.ndarray:
    """n squashed draws from a single (mu, log_sigma) head pair, shape (n, 2).

    Vectorized counterpart of sample_action's draw path, used for trigger
    statistics and evaluation sweeps over many samples.
    """
    xi = rng.standard_normal((n, 2))
    _, a, _ = squash_and_logprob(np.broadcast_to(mu, (n, 2)),
                                 np.broadcast_to(log_sigma, (n, 2)), xi)
    return a
