# src/marttree/checks.py

from dataclasses import dataclass
import numpy as np
from ..errors import DomainError, FormatError
from ..rearrange import row_k_functionals
from .transforms import require_fit, scale
from .tree import index_to_path, path_to_string

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NodeCheckMap:
    """Per-node verdicts keyed by the 1-based dotted path ('' is the root)."""
    name: str
    results: dict

    @property
    def holds(self):
        return all(self.results.values())

    def __bool__(self):
        return self.holds

    def failures(self):
        return [path for path, ok in self.results.items() if not ok]

    def to_rows(self):
        return [{"check": self.name, "node": path, "ok": ok} for path, ok in self.results.items()]

    def to_json(self):
        return {"check": self.name, "holds": self.holds, "nodes": dict(self.results)}


def _require_same_shape(d, e):
    if d.shape != e.shape:
        raise FormatError(f"Trees must have the same shape, got {d.shape} and {e.shape}")


def _node_map(name, tree, verdicts):
    results = {}
    for k, level in enumerate(verdicts):
        for row, ok in enumerate(level):
            results[path_to_string(index_to_path(row, k, tree.branching))] = bool(ok)
    return NodeCheckMap(name, results)


def _tail_counts(values, thresholds):
    """counts[r, m] = #{i : |values[r, i]| > thresholds[r, m]}."""
    return (np.abs(values)[:, None, :] > thresholds[:, :, None]).sum(axis=2)


def _merged_thresholds(d_level, e_level):
    rows = d_level.shape[0]
    return np.concatenate((np.zeros((rows, 1)), np.abs(d_level), np.abs(e_level)), axis=1)


def check_domination(d, e, tol=DEFAULT_TOLERANCE):
    """At every node, the K-functional of e's branch vector never exceeds d's."""
    _require_same_shape(d, e)
    verdicts = [
        np.all(row_k_functionals(e_level) <= row_k_functionals(d_level) + tol, axis=1)
        for d_level, e_level in zip(d.levels, e.levels)
    ]
    return _node_map("domination", d, verdicts)


def check_strong_domination(d, e, tol=DEFAULT_TOLERANCE):
    """At every node and threshold lam: #{|e_i| > lam + tol} <= #{|d_i| > lam}."""
    _require_same_shape(d, e)
    verdicts = []
    for d_level, e_level in zip(d.levels, e.levels):
        thresholds = _merged_thresholds(d_level, e_level)
        e_counts = _tail_counts(e_level, thresholds + tol)
        d_counts = _tail_counts(d_level, thresholds)
        verdicts.append(np.all(e_counts <= d_counts, axis=1))
    return _node_map("strong_domination", d, verdicts)


def check_subordination(d, e, tol=DEFAULT_TOLERANCE):
    """Pointwise |e| <= |d| on every branch."""
    _require_same_shape(d, e)
    verdicts = [np.all(np.abs(e_level) <= np.abs(d_level) + tol, axis=1)
                for d_level, e_level in zip(d.levels, e.levels)]
    return _node_map("subordination", d, verdicts)


def check_tangency(d, e, tol=0.0):
    """Same multiset of branch values at every node: equal conditional laws."""
    _require_same_shape(d, e)
    verdicts = [np.all(np.abs(np.sort(e_level, axis=1) - np.sort(d_level, axis=1)) <= tol, axis=1)
                for d_level, e_level in zip(d.levels, e.levels)]
    return _node_map("tangency", d, verdicts)


def check_threshold_domination(d, e, s, tol=DEFAULT_TOLERANCE):
    """
    E[max(s_k, |e_k|)] <= E[max(s_k, |d_k|)] at every node, for a nonnegative predictable
    threshold s given as a scalar attachment. Holding for every s is the same as
    node-wise domination.
    """
    _require_same_shape(d, e)
    require_fit(d, s, "scalar")
    verdicts = []
    for k, (d_level, e_level, s_level) in enumerate(zip(d.levels, e.levels, s.levels)):
        if np.any(s_level < 0):
            row = int(np.argmin(s_level))
            raise DomainError(
                f"Threshold must be nonnegative, got {s_level[row]:.6g} at node "
                f"'{path_to_string(index_to_path(row, k, d.branching))}'"
            )
        lhs = np.maximum(s_level[:, None], np.abs(e_level)).mean(axis=1)
        rhs = np.maximum(s_level[:, None], np.abs(d_level)).mean(axis=1)
        verdicts.append(lhs <= rhs + tol)
    return _node_map("threshold_domination", d, verdicts)


@dataclass(frozen=True)
class KappaDominationResult:
    """
    tail_condition: #{|e| > lam} <= kappa #{|d| > lam} at every node and lam.
    majorization_condition: e is dominated by kappa d at every node, the
    conclusion that carries the kappa c_p bound. The result is truthy when the
    conclusion holds.
    """
    kappa: float
    tail_condition: NodeCheckMap
    majorization_condition: NodeCheckMap

    @property
    def holds(self):
        return self.majorization_condition.holds

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {
            "kappa": self.kappa,
            "holds": self.holds,
            "tail_condition": self.tail_condition.holds,
            "majorization_condition": self.majorization_condition.holds,
        }


def check_kappa_domination(d, e, kappa, tol=DEFAULT_TOLERANCE):
    if kappa < 1:
        raise DomainError(f"kappa must be at least 1, got {kappa}")
    _require_same_shape(d, e)
    verdicts = []
    for d_level, e_level in zip(d.levels, e.levels):
        thresholds = _merged_thresholds(d_level, e_level)
        e_counts = _tail_counts(e_level, thresholds + tol)
        d_counts = _tail_counts(d_level, thresholds)
        verdicts.append(np.all(e_counts <= kappa * d_counts, axis=1))
    tail = _node_map("kappa_tail", d, verdicts)
    majorization = check_domination(scale(d, kappa), e, tol)
    return KappaDominationResult(float(kappa), tail, NodeCheckMap("kappa_domination", majorization.results))


def check_martingale_property(tree, tol=1e-12):
    """
    Exact enumeration: the average of S_k over the children of every level-(k-1)
    node equals S_{k-1} at that node.
    """
    partial = np.zeros(1)
    for level in tree.levels:
        children = partial[:, None] + level
        scale_ = 1.0 + np.abs(children).max()
        if np.any(np.abs(children.mean(axis=1) - partial) > tol * scale_):
            return False
        partial = children.reshape(-1)
    return True
