# src/marttree/generators/abstract_generator.py

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from ...errors import HypothesisCheckError
from ...logger import get_logger
from .random_tree import random_tree

logger = get_logger("marttree.generators")


@dataclass(frozen=True)
class DominatedPair:
    """(d, e) built so that e satisfies the generator's hypothesis relative to d."""
    kind: str
    d: object
    e: object
    attachment: object = None
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __iter__(self):
        yield self.d
        yield self.e


class AbstractGenerator(ABC):

    def __init__(self, generator_type, params=None):
        self.generator_type = generator_type
        self.params = dict(params or {})

    # builds the attachment for d and applies it; randomness comes only from
    # per-node streams of `seed`
    @abstractmethod
    def transform(self, d, seed):
        """Returns (e, attachment)."""
        pass

    # node map of the check matching the hypothesis this generator guarantees
    @abstractmethod
    def hypothesis_check(self, d, e, tol):
        pass

    def hypothesis_holds(self, d, e, tol):
        return self.hypothesis_check(d, e, tol).holds

    def generate(self, d, seed):
        e, attachment = self.transform(d, seed)
        return DominatedPair(self.generator_type, d, e, attachment, dict(self.params), int(seed))

    def pair(self, depth, branching, seed):
        return self.generate(random_tree(depth, branching, seed), seed)

    def verify(self, pair, tol=1e-9):
        ok = bool(self.hypothesis_holds(pair.d, pair.e, tol))
        if not ok:
            raise HypothesisCheckError(
                f"Generated {self.generator_type} pair (seed {pair.seed}) fails its hypothesis check"
            )
        return ok
