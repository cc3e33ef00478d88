"""Deterministic RNG stream derivation.

Every stochastic component draws from a Generator keyed by a tuple of
integers, so runs are reproducible end to end and independent of worker
count: the stream for (seed, episode 17) is the same whether episode 17
runs first, last, or on another process.
"""

import numpy as np

# Stream namespaces. Keeping them distinct guarantees that e.g. network
# initialization never shares a stream with episode rollouts.
NET_INIT = 0
LEARNER = 1
EPISODE = 2
SWEEP = 3


def generator(*key: int) -> np.random.Generator:
    """PCG64 generator for an integer key tuple."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def episode_stream(seed: int, episode: int) -> tuple[int, ...]:
    return (seed, EPISODE, episode)


def sweep_stream(seed: int, cell: int, trial: int) -> tuple[int, ...]:
    return (seed, SWEEP, cell, trial)
