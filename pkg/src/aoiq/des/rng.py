"""Deterministic random streams for the simulation core.

Each (master seed, replication, purpose) triple names an independent
xoshiro256++ stream, seeded through numpy's SeedSequence. Purposes are laid
out as: one arrival stream per source (0..N-1), then service (N), failure
(N+1) and repair (N+2). Keeping the purposes on fixed streams gives common
random numbers across parameter points with the same seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STREAM_SERVICE = 0  # offsets relative to n_sources
STREAM_FAILURE = 1
STREAM_REPAIR = 2


def make_states(master_seed: int, replication: int, n_sources: int) -> np.ndarray:
    """State matrix, one xoshiro256++ state row per purpose stream."""
    states = np.empty((n_sources + 3, 4), dtype=np.uint64)
    for purpose in range(n_sources + 3):
        ss = np.random.SeedSequence(entropy=(master_seed, replication, purpose))
        row = ss.generate_state(4, dtype=np.uint64)
        if not row.any():  # all-zero state would be absorbing
            row[0] = np.uint64(0x9E3779B97F4A7C15)
        states[purpose] = row
    return states


@njit(cache=True, inline="always")
def _rotl(x, k):
    return np.uint64((x << k) | (x >> (np.uint64(64) - k)))


@njit(cache=True)
def xo_next(states, i):
    s0 = states[i, 0]
    s1 = states[i, 1]
    s2 = states[i, 2]
    s3 = states[i, 3]
    result = np.uint64(_rotl(np.uint64(s0 + s3), np.uint64(23)) + s0)
    t = np.uint64(s1 << np.uint64(17))
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, np.uint64(45))
    states[i, 0] = s0
    states[i, 1] = s1
    states[i, 2] = s2
    states[i, 3] = s3
    return result


@njit(cache=True)
def xo_uniform(states, i):
    """Uniform double in [0, 1) from the top 53 bits."""
    return np.float64(xo_next(states, i) >> np.uint64(11)) * (2.0**-53)


@njit(cache=True)
def xo_exponential(states, i, scale):
    u = xo_uniform(states, i)
    return -np.log1p(-u) * scale
