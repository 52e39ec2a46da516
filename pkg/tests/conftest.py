"""Shared helpers for the suite: seeded random objects and small fixtures."""

import numpy as np
import pytest

from uext import states


def rng(seed):
    return np.random.default_rng(seed)


def random_density(d, seed, rank=None):
    return states.random_state(d, rank=rank, seed=seed)


def random_unitary(d, seed):
    return states.haar_random_unitary(d, np.random.default_rng(seed))


def random_tp_channel(d, n_kraus, seed):
    """Random trace-preserving Kraus set via a Stinespring isometry."""
    g = rng(seed)
    mat = g.normal(size=(n_kraus * d, d)) + 1j * g.normal(size=(n_kraus * d, d))
    q, _ = np.linalg.qr(mat)
    return [q[k * d:(k + 1) * d, :] for k in range(n_kraus)]


@pytest.fixture
def two_qubit_pair():
    return states.random_bipartite_state(2, 2, seed=11)
