"""
Shared fixtures for the dimfibre test suite
"""

import numpy as np
import pytest

from netsim import GaussianState


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng):
    """
    Factory for random physical n-mode Gaussian states

    Thermal noise, then single-mode squeezing, then a passive orthogonal mixer.
    """
    def make(n):
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        mixer = np.kron(q, np.eye(2))
        blocks = []
        for _ in range(n):
            thermal = 2 * rng.uniform(0.0, 1.5) + 1
            r = rng.uniform(-0.6, 0.6)
            blocks.append(thermal * np.diag([np.exp(2 * r), np.exp(-2 * r)]))
        core = np.zeros((2 * n, 2 * n))
        for k, block in enumerate(blocks):
            core[2 * k:2 * k + 2, 2 * k:2 * k + 2] = block
        covariance = mixer @ core @ mixer.T
        covariance = 0.5 * (covariance + covariance.T)
        mean = rng.normal(scale=2.0, size=2 * n)
        return GaussianState(n=n, mean=mean, covariance=covariance).validate()
    return make
