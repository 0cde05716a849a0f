# src/marttree/generators/random_tree.py

import numpy as np
from ...utils.rng import Stream, node_stream
from ..tree import MartingaleTree


def random_branch(rng, branching):
    values = rng.standard_normal(branching)
    return values - values.mean()


def random_tree(depth, branching, seed):
    """Gaussian branch vectors centered to sum zero; each node draws from its own stream."""
    return MartingaleTree.from_function(
        depth, branching,
        lambda path: random_branch(node_stream(seed, Stream.TREE, path), branching),
    )


def fair_coin_tree(depth):
    """Branch vector (1, -1) at every node: the simple random walk."""
    return MartingaleTree.from_function(depth, 2, lambda path: np.array([1.0, -1.0]))
