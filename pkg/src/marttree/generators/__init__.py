from .abstract_generator import AbstractGenerator, DominatedPair
from .generator_factory import GENERATOR_KINDS, GeneratorFactory, dominated_pair
from .random_tree import fair_coin_tree, random_tree

__all__ = [
    "AbstractGenerator",
    "DominatedPair",
    "GENERATOR_KINDS",
    "GeneratorFactory",
    "dominated_pair",
    "fair_coin_tree",
    "random_tree",
]
