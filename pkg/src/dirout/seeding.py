"""Deterministic seed derivation for nested randomized stages."""

import numpy as np

__all__ = ["derive_seed"]


def derive_seed(seed: int, *key: int) -> int:
    """Derive a child seed from a master seed and an integer key path.

    The same (seed, key) always yields the same child, and distinct keys give
    statistically independent streams, so replicates and per-group stages can
    run in any order or in parallel.
    """
    return int(np.random.SeedSequence([int(seed), *map(int, key)]).generate_state(1)[0])
