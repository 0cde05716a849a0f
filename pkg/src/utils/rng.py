# src/utils/rng.py

from enum import IntEnum
import numpy as np


class Stream(IntEnum):
    """Purpose tags that keep per-node random streams independent."""
    TREE = 0
    SIGNS = 1
    PERMUTATIONS = 2
    OPERATORS = 3
    PIPELINE = 4
    MONTE_CARLO = 5
    BOOTSTRAP = 6
    EXPERIMENT = 7


def stream(seed, purpose, *key):
    """
    Seedable PCG64 generator for (seed, purpose, key...).

    The key is hashed together with the seed by numpy's SeedSequence, so the
    stream for a node depends only on the seed and the node path, never on the
    order in which nodes are visited or on how work is split between workers.
    """
    spawn_key = (int(purpose),) + tuple(int(k) for k in key)
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.PCG64(sequence))


def node_stream(seed, purpose, path):
    # length goes first so (1,) and (1, 0) never share a stream
    return stream(seed, purpose, len(path), *path)
