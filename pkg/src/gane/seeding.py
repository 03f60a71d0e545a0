"""Seed derivation tree.

Every random quantity in a run is a pure function of ``run_seed`` and a
path of small integers, hashed through :class:`numpy.random.SeedSequence`::

    (run_seed, VARIATION, generation, population_tag, index)  -> mutation seed
    (run_seed, PAIRING, generation, pairing_round)            -> pairing seed
    (run_seed, MATCH, generation)                             -> env seed (even)
    (run_seed, HOLDOUT, k)                                    -> env seed (odd)
    (run_seed, TRAJECTORY, k)                                 -> env seed (odd)

Training environment seeds are forced even and measurement seeds odd, so
the two sets are disjoint by construction.
"""

from __future__ import annotations

import numpy as np

VARIATION = 1
PAIRING = 2
MATCH = 3
HOLDOUT = 4
TRAJECTORY = 5

TAG_CODES = {"generator": 0, "discriminator": 1}

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(run_seed: int, *path: int) -> int:
    entropy = [int(run_seed) & _MASK64, *(int(p) for p in path)]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def mutation_seed(run_seed: int, generation: int, tag: str, index: int) -> int:
    return derive_seed(run_seed, VARIATION, generation, TAG_CODES[tag], index)


def pairing_seed(run_seed: int, generation: int, round_: int = 0) -> int:
    return derive_seed(run_seed, PAIRING, generation, round_)


def match_seed(run_seed: int, generation: int) -> int:
    return derive_seed(run_seed, MATCH, generation) & ~1 & _MASK64


def holdout_seeds(run_seed: int, n: int) -> list[int]:
    return [derive_seed(run_seed, HOLDOUT, k) | 1 for k in range(n)]


def trajectory_seed(run_seed: int, holdout: list[int] | None = None) -> int:
    """An odd seed outside ``holdout``, never used for training or scoring."""
    used = set(holdout or ())
    k = 0
    while True:
        seed = derive_seed(run_seed, TRAJECTORY, k) | 1
        if seed not in used:
            return seed
        k += 1
