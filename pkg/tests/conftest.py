"""Shared fixtures: a statistics-sized walk space with a session-wide label
memo (labels are salt-independent, so every test can reuse the same cache)."""

import numpy as np
import pytest

from tclaw.channel import circuit_channel, gate, rotation_channel
from tclaw.exact import ChannelMatrix
from tclaw.paulis import Pauli
from tclaw.walk import LabelCache, WalkConfig, derive_salt


STAT_SEED = 20260821


@pytest.fixture(scope="session")
def stat_walk():
    """Two-qubit walk space large enough for statistical assertions
    (15^4 = 50625 points per side) with a shared label cache.

    One qubit would be cheaper but its coset space saturates: long
    single-qubit products collapse onto a few thousand labels, which
    correlates successors and skews balance and trail-length statistics.
    """
    cfg = WalkConfig(
        n=2, t=8, chunk=0, theta_exp=6, salt=derive_salt(STAT_SEED, 2, 8, 0, 0)
    )
    c_hat = circuit_channel([gate("T", 0), gate("CNOT", 0, 1)], 2)
    cache = LabelCache(1 << 18)
    return cfg, c_hat, cache


def planted_target(n, t, rng, clifford_gates=6):
    """Random product of t rotations times a random Clifford channel.

    Returns (c_hat, pauli_indices, d_hat); the true minimal T-count of
    c_hat is <= t, and tests that need exact minimality check it with the
    exhaustive engine.
    """
    from test_channel import random_circuit

    indices = [int(rng.integers(1, 4**n)) for _ in range(t)]
    d_hat = circuit_channel(random_circuit(rng, n, clifford_gates, t_kinds=False), n)
    m = d_hat
    for i in indices:
        m = rotation_channel(Pauli.from_index(i, n)) @ m
    return m, indices, d_hat


@pytest.fixture
def rng():
    return np.random.default_rng(99)
