from .checks import (
    KappaDominationResult,
    NodeCheckMap,
    check_domination,
    check_kappa_domination,
    check_martingale_property,
    check_strong_domination,
    check_subordination,
    check_tangency,
    check_threshold_domination,
)
from .experiment import ExperimentReport, run_ratio_experiment
from .generators import GeneratorFactory, dominated_pair, fair_coin_tree, random_tree
from .norms import MonteCarloEstimate, enumerate_partial_sums, lp_norm_partial_sum, monte_carlo_lp
from .pipeline import PipelineReport, proof_pipeline
from .transforms import (
    NodeOperatorResult,
    apply_node_operators,
    scale,
    tangent_by_permutation,
    transfer_operators,
    transform_by_signs,
)
from .tree import MartingaleTree, PredictableAttachment, path_to_string, string_to_path
