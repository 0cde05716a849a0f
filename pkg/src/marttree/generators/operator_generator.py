# src/marttree/generators/operator_generator.py

import numpy as np
from ...errors import DomainError
from ...utils.rng import Stream, node_stream
from ..checks import check_domination
from ..transforms import apply_node_operators
from ..tree import PredictableAttachment
from .abstract_generator import AbstractGenerator


def random_zero_sum_contraction(rng, branching, terms, mass=1.0):
    """
    mass * (1/2 sum a_i P_i - 1/2 sum b_j Q_j) with Dirichlet weights a, b and
    random permutations. Every row and column sums to zero and has absolute
    sum at most mass.
    """
    a = rng.dirichlet(np.ones(terms))
    b = rng.dirichlet(np.ones(terms))
    identity = np.eye(branching)
    matrix = np.zeros((branching, branching))
    for weight in a:
        matrix += 0.5 * weight * identity[rng.permutation(branching)]
    for weight in b:
        matrix -= 0.5 * weight * identity[rng.permutation(branching)]
    return mass * matrix


class OperatorGenerator(AbstractGenerator):

    def __init__(self, params=None):
        super().__init__('operator', params)
        self.terms = int(self.params.setdefault('terms', 2))
        self.mass = float(self.params.setdefault('mass', 1.0))
        if self.terms < 1:
            raise DomainError(f"terms must be at least 1, got {self.terms}")
        if not 0.0 <= self.mass <= 1.0:
            raise DomainError(f"mass must lie in [0,1], got {self.mass}")

    def operators(self, d, seed):
        return PredictableAttachment.from_function(
            'matrix', d.depth, d.branching,
            lambda path: random_zero_sum_contraction(
                node_stream(seed, Stream.OPERATORS, path), d.branching, self.terms, self.mass),
        )

    def transform(self, d, seed):
        T = self.operators(d, seed)
        return apply_node_operators(d, T).tree, T

    def hypothesis_check(self, d, e, tol):
        return check_domination(d, e, tol)
