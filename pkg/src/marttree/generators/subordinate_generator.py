# src/marttree/generators/subordinate_generator.py

from ...errors import UsageError
from ...utils.rng import Stream, node_stream, stream
from ..checks import check_subordination
from ..transforms import transform_by_signs
from ..tree import PredictableAttachment
from .abstract_generator import AbstractGenerator

SIGN_MODES = ("uniform", "global")


class SubordinateGenerator(AbstractGenerator):
    """
    Burkholder transforms e = v d. sign_mode 'uniform' draws v uniformly from
    [-1, 1] at every node; 'global' uses one random sign for the whole tree,
    which makes e = +-d an isometry.
    """

    def __init__(self, params=None):
        super().__init__('subordinate', params)
        self.sign_mode = self.params.setdefault('sign_mode', 'uniform')
        if self.sign_mode not in SIGN_MODES:
            raise UsageError(f"{self.sign_mode} is not a valid sign mode.  Please provide uniform or global.")

    def transform(self, d, seed):
        if self.sign_mode == 'global':
            sign = 1.0 if stream(seed, Stream.SIGNS).random() < 0.5 else -1.0
            v = PredictableAttachment.constant('scalar', d.depth, d.branching, sign)
        else:
            v = PredictableAttachment.from_function(
                'scalar', d.depth, d.branching,
                lambda path: node_stream(seed, Stream.SIGNS, path).uniform(-1.0, 1.0),
            )
        return transform_by_signs(d, v), v

    def hypothesis_check(self, d, e, tol):
        return check_subordination(d, e, tol)
