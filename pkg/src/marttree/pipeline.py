# src/marttree/pipeline.py

from dataclasses import dataclass
import numpy as np
from ..errors import DomainError
from ..logger import get_logger
from ..stochmat import classify, signed_decompose
from ..utils.rng import Stream, node_stream
from .transforms import require_fit
from .tree import MartingaleTree, iter_paths, path_to_index, path_to_string

logger = get_logger("marttree.pipeline")

IDENTITY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class NodeReport:
    path: str
    classification: str
    terms: int
    deviation: float
    identity_holds: bool
    sampled_index: int
    sampled_sign: int
    tangent: bool

    def to_json(self):
        return {
            "node": self.path,
            "classification": self.classification,
            "terms": self.terms,
            "deviation": self.deviation,
            "identity_holds": self.identity_holds,
            "sampled_index": self.sampled_index + 1,
            "sampled_sign": self.sampled_sign,
            "tangent": self.tangent,
        }


@dataclass(frozen=True)
class PipelineReport:
    nodes: tuple
    e: MartingaleTree
    sampled: MartingaleTree
    seed: int

    @property
    def all_identities_hold(self):
        return all(node.identity_holds for node in self.nodes)

    @property
    def all_tangent(self):
        return all(node.tangent for node in self.nodes)

    @property
    def max_deviation(self):
        return max((node.deviation for node in self.nodes), default=0.0)

    @property
    def holds(self):
        return self.all_identities_hold and self.all_tangent

    def to_rows(self):
        return [node.to_json() for node in self.nodes]

    def to_json(self):
        return {
            "seed": self.seed,
            "all_identities_hold": self.all_identities_hold,
            "all_tangent": self.all_tangent,
            "max_deviation": self.max_deviation,
            "nodes": self.to_rows(),
            "e": self.e.to_json(),
            "sampled": self.sampled.to_json(),
        }


def proof_pipeline(d, T, seed, tol=1e-9, identity_tol=IDENTITY_TOLERANCE):
    """
    Replays the randomization behind operator domination node by node. Each
    T(node) is written as sum_i |theta_i| eps_i P_i, the image T d is checked
    against sum_i |theta_i| eps_i (P_i d), and one index I is drawn with
    probability |theta_I|. The drawn branch P_I d is a rearrangement of d's
    branch, so the sampled sequence eps_I P_I d is tangent to d up to sign.
    """
    require_fit(d, T, "matrix")
    e_levels = [np.zeros_like(level) for level in d.levels]
    sampled_levels = [np.zeros_like(level) for level in d.levels]
    reports = []
    for path in iter_paths(d.depth, d.branching):
        name = path_to_string(path)
        matrix = classify(T.value(path), tol)
        if not matrix.is_zero_sum_contraction():
            raise DomainError(
                f"Operator at node '{name}' is {matrix.classification.value}, not a zero-sum contraction"
            )
        combination = signed_decompose(matrix, tol)
        branch = d.branch(path)
        image = matrix.entries @ branch
        deviation = float(np.max(np.abs(combination.apply(branch) - image)))

        thetas = combination.thetas
        weights = np.abs(thetas) / np.abs(thetas).sum()
        index = int(node_stream(seed, Stream.PIPELINE, path).choice(len(thetas), p=weights))
        sign = 1 if thetas[index] >= 0 else -1
        h = branch[np.asarray(combination.terms[index][1])]

        row = path_to_index(path, d.branching)
        e_levels[len(path)][row] = image
        sampled_levels[len(path)][row] = sign * h
        reports.append(NodeReport(
            path=name,
            classification=matrix.classification.value,
            terms=len(combination.terms),
            deviation=deviation,
            identity_holds=deviation <= identity_tol,
            sampled_index=index,
            sampled_sign=sign,
            tangent=bool(np.array_equal(np.sort(h), np.sort(branch))),
        ))
    report = PipelineReport(
        tuple(reports),
        MartingaleTree(tuple(e_levels), d.branching),
        MartingaleTree(tuple(sampled_levels), d.branching),
        int(seed),
    )
    logger.info("Proof pipeline over %d nodes: identities %s, max deviation %.3g",
                len(reports), "hold" if report.all_identities_hold else "FAIL", report.max_deviation)
    return report
