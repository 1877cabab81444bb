"""Deterministic RNG stream derivation.

Every source of randomness in a run is a generator derived from the root
seed plus integer context tags, so results are bit-identical regardless of
worker count and runs can resume mid-way without replaying earlier
generations.
"""

from __future__ import annotations

import numpy as np

# optimizer-level streams
TAG_INIT = 101
TAG_VARIATION = 102
TAG_EVAL = 103
TAG_PSL_MODEL = 104
TAG_PSL_PREF = 105
TAG_RANDOM = 106

# federated-simulator streams (keyed off a per-evaluation seed)
TAG_FL_DATA = 201
TAG_FL_INIT = 202
TAG_FL_CLIENT = 203
TAG_FL_MECH = 204
TAG_FL_MASK = 205


def stream(*keys: int) -> np.random.Generator:
    """A generator for the given (seed, tag, indices...) context."""
    return np.random.default_rng([int(k) for k in keys])


def spawn_seed(*keys: int) -> int:
    """A single derived 64-bit seed for handing to a sub-component."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])
