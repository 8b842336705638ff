"""Seed derivation for reproducible, order-independent replications.

Replication ``r`` of an experiment draws from a generator seeded with
``base_seed XOR mix64(r)``, where ``mix64`` is the SplitMix64 output function.
Because every replication owns its seed, results do not depend on how the
replications are scheduled across workers.
"""

import numpy as np

from ._validation import check_count, check_seed

_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer applied to ``x + golden gamma`` (mod 2**64)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def replication_seed(base_seed: int, replication: int) -> int:
    base_seed = check_seed(base_seed)
    replication = check_count(replication, "replication", minimum=0)
    return base_seed ^ mix64(replication)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(check_seed(seed)))
