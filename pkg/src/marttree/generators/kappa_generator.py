# src/marttree/generators/kappa_generator.py

from ...errors import DomainError
from ..checks import check_kappa_domination
from ..transforms import scale, tangent_by_permutation
from .abstract_generator import AbstractGenerator
from .tangent_generator import random_permutations


class KappaGenerator(AbstractGenerator):
    """e = kappa * (tangent copy of d). The permutations do not depend on kappa."""

    def __init__(self, params=None):
        super().__init__('kappa', params)
        self.kappa = float(self.params.setdefault('kappa', 2.0))
        if self.kappa < 1:
            raise DomainError(f"kappa must be at least 1, got {self.kappa}")

    def transform(self, d, seed):
        pi = random_permutations(d, seed)
        return scale(tangent_by_permutation(d, pi), self.kappa), pi

    def hypothesis_check(self, d, e, tol):
        return check_kappa_domination(d, e, self.kappa, tol).majorization_condition
