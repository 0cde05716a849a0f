# src/marttree/generators/generator_factory.py

from ...errors import UsageError
from .kappa_generator import KappaGenerator
from .operator_generator import OperatorGenerator
from .subordinate_generator import SubordinateGenerator
from .tangent_generator import TangentGenerator

GENERATOR_KINDS = ('subordinate', 'tangent', 'operator', 'kappa')


class GeneratorFactory:
    @staticmethod
    def create_generator(kind, params=None):
        if kind == 'subordinate':
            return SubordinateGenerator(params)
        elif kind == 'tangent':
            return TangentGenerator(params)
        elif kind == 'operator':
            return OperatorGenerator(params)
        elif kind == 'kappa':
            return KappaGenerator(params)
        else:
            raise UsageError(f"{kind} is not a valid generator.  Please provide subordinate, tangent, operator, or kappa.")


def dominated_pair(kind, depth, branching, seed, params=None):
    """Random d with e built to satisfy the `kind` hypothesis; unpacks as (d, e)."""
    return GeneratorFactory.create_generator(kind, params).pair(depth, branching, seed)
