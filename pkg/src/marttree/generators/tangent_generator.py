# src/marttree/generators/tangent_generator.py

from ...utils.rng import Stream, node_stream
from ..checks import check_tangency
from ..transforms import tangent_by_permutation
from ..tree import PredictableAttachment
from .abstract_generator import AbstractGenerator


def random_permutations(d, seed):
    return PredictableAttachment.from_function(
        'permutation', d.depth, d.branching,
        lambda path: node_stream(seed, Stream.PERMUTATIONS, path).permutation(d.branching),
    )


class TangentGenerator(AbstractGenerator):

    def __init__(self, params=None):
        super().__init__('tangent', params)

    def transform(self, d, seed):
        pi = random_permutations(d, seed)
        return tangent_by_permutation(d, pi), pi

    def hypothesis_check(self, d, e, tol):
        return check_tangency(d, e)
