# src/marttree/transforms.py

from dataclasses import dataclass
import numpy as np
from ..errors import DomainError, FormatError, NoTransferOperatorError
from ..logger import get_logger
from ..stochmat import center_cols, center_rows
from ..transfer import construct_transfer
from .tree import MartingaleTree, PredictableAttachment, index_to_path, path_to_string

logger = get_logger("marttree.transforms")

DEFAULT_TOLERANCE = 1e-9


def require_fit(tree, attachment, kind):
    if attachment.kind != kind:
        raise FormatError(f"Expected a {kind} attachment, got {attachment.kind}")
    if not attachment.fits(tree):
        raise FormatError(
            f"Attachment shape {(attachment.depth, attachment.branching)} does not match tree shape {tree.shape}"
        )


def transform_by_signs(d, v, tol=DEFAULT_TOLERANCE):
    """Burkholder transform: e_k = v_k d_k with a predictable v bounded by 1."""
    require_fit(d, v, "scalar")
    for k, level in enumerate(v.levels):
        if np.any(np.abs(level) > 1 + tol):
            row = int(np.argmax(np.abs(level)))
            raise DomainError(
                f"Predictable multiplier exceeds 1 in absolute value at node "
                f"'{path_to_string(index_to_path(row, k, d.branching))}'"
            )
    return d.map_levels(lambda k, level: v.levels[k][:, None] * level)


def tangent_by_permutation(d, pi):
    """e_k(path, j) = d_k(path, pi(path)[j]): same conditional law at every node."""
    require_fit(d, pi, "permutation")
    return d.map_levels(lambda k, level: np.take_along_axis(level, pi.levels[k], axis=1))


def scale(tree, factor):
    return tree.map_levels(lambda k, level: factor * level)


@dataclass(frozen=True)
class NodeOperatorResult:
    """Image tree plus the nodes whose operator had to be re-centered."""
    tree: MartingaleTree
    normalized_nodes: tuple
    max_centered_norm: float

    @property
    def normalized(self):
        return bool(self.normalized_nodes)


def apply_node_operators(d, T, tol=DEFAULT_TOLERANCE, zero_sum_tol=1e-12):
    """
    e_k(path, .) = T_k(path) d_k(path, .). Each T_k must have row and column
    absolute sums at most 1. When an image is not zero-sum, the node operator is
    replaced by its row- then column-centered version, which keeps the action on
    zero-sum vectors and forces a zero-sum image.
    """
    require_fit(d, T, "matrix")
    levels = []
    normalized = []
    max_norm = 0.0
    for k, (level, operators) in enumerate(zip(d.levels, T.levels)):
        magnitudes = np.abs(operators)
        line_max = np.maximum(magnitudes.sum(axis=2).max(axis=1), magnitudes.sum(axis=1).max(axis=1))
        if np.any(line_max > 1 + tol):
            row = int(np.argmax(line_max))
            raise DomainError(
                f"Operator at node '{path_to_string(index_to_path(row, k, d.branching))}' has a row or "
                f"column absolute sum of {line_max[row]:.6g} > 1"
            )
        image = np.einsum("rij,rj->ri", operators, level)
        scale_ = np.maximum(1.0, np.abs(image).sum(axis=1))
        off = np.flatnonzero(np.abs(image.sum(axis=1)) > zero_sum_tol * scale_)
        for row in off:
            centered = center_cols(center_rows(operators[row]))
            image[row] = centered @ level[row]
            centered_abs = np.abs(centered)
            max_norm = max(max_norm, float(centered_abs.sum(axis=1).max()), float(centered_abs.sum(axis=0).max()))
            normalized.append(path_to_string(index_to_path(int(row), k, d.branching)))
        levels.append(image)
    if normalized:
        logger.info("Re-centered %d node operator(s) to restore zero-sum images", len(normalized))
    return NodeOperatorResult(MartingaleTree(tuple(levels), d.branching), tuple(normalized), max_norm)


def transfer_operators(d, e, tol=DEFAULT_TOLERANCE):
    """
    Matrix attachment with T_k(path) d_k(path, .) = e_k(path, .) at every node,
    each T_k the transfer operator of the two branch vectors. Exists exactly when
    e is dominated by d node-wise; the first node where it is not is reported.
    """
    if d.shape != e.shape:
        raise FormatError(f"Trees must have the same shape, got {d.shape} and {e.shape}")
    n = d.branching
    levels = []
    for k, (d_level, e_level) in enumerate(zip(d.levels, e.levels)):
        operators = np.empty((d_level.shape[0], n, n))
        for row in range(d_level.shape[0]):
            try:
                operators[row] = construct_transfer(d_level[row], e_level[row], tol).T
            except NoTransferOperatorError as err:
                node = path_to_string(index_to_path(row, k, n))
                raise DomainError(f"No transfer operator at node '{node}': {err}") from err
        levels.append(operators)
    logger.info("Built transfer operators at %d nodes", sum(level.shape[0] for level in levels))
    return PredictableAttachment("matrix", tuple(levels), n)
