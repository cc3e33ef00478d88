import os

import pytest


@pytest.fixture(scope="session")
def cache_dir():
    """Durable cache for expensive artifacts (trained checkpoints).

    Lives inside the repo so repeated suite runs reuse converged policies;
    everything in it is reproducible from seeds and safe to delete.
    """
    path = os.environ.get("PERCHRL_TEST_CACHE",
                          os.path.join(os.path.dirname(__file__), "..",
                                       ".cache", "test-artifacts"))
    path = os.path.abspath(path)
    os.makedirs(path, exist_ok=True)
    return path
