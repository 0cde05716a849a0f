# src/marttree/tree.py

from dataclasses import dataclass
import itertools
import numpy as np
from ..errors import FormatError
from ..utils.io import require_keys

ZERO_SUM_TOLERANCE = 1e-12

ATTACHMENT_KINDS = ("scalar", "matrix", "permutation")


def path_to_index(path, branching):
    """Row of a node inside its level: the path read as a base-N number."""
    index = 0
    for step in path:
        index = index * branching + int(step)
    return index


def index_to_path(index, level, branching):
    path = []
    for _ in range(level):
        index, step = divmod(index, branching)
        path.append(step)
    return tuple(reversed(path))


def path_to_string(path):
    """0-based internal path -> 1-based dotted string; the root is ''."""
    return ".".join(str(step + 1) for step in path)


def string_to_path(text, branching):
    if text == "":
        return ()
    try:
        path = tuple(int(part) - 1 for part in text.split("."))
    except ValueError:
        raise FormatError(f"Invalid node path '{text}'")
    if any(step < 0 or step >= branching for step in path):
        raise FormatError(f"Node path '{text}' leaves the alphabet 1..{branching}")
    return path


def iter_paths(depth, branching):
    """Every node path of length 0..depth-1, level by level in lexicographic order."""
    for level in range(depth):
        for path in itertools.product(range(branching), repeat=level):
            yield path


def _check_shape(depth, branching):
    if int(depth) < 1:
        raise FormatError(f"Tree depth must be at least 1, got {depth}")
    if int(branching) < 2:
        raise FormatError(f"Tree branching must be at least 2, got {branching}")


@dataclass(frozen=True)
class MartingaleTree:
    """
    Uniform tree of depth n and branching N. levels[k] has shape (N**k, N): row r
    holds the branch values d_{k+1}(path, .) for the node at level k with index r.
    Every row sums to zero, so the partial sums along paths form a martingale.
    """
    levels: tuple
    branching: int

    def __post_init__(self):
        levels = []
        for k, level in enumerate(self.levels):
            array = np.array(level, dtype=float)
            if array.shape != (self.branching ** k, self.branching):
                raise FormatError(
                    f"Level {k + 1} must have shape {(self.branching ** k, self.branching)}, got {array.shape}"
                )
            if not np.all(np.isfinite(array)):
                raise FormatError(f"Level {k + 1} has non-finite branch values")
            array.setflags(write=False)
            levels.append(array)
        _check_shape(len(levels), self.branching)
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def depth(self):
        return len(self.levels)

    @property
    def shape(self):
        return (self.depth, self.branching)

    def branch(self, path):
        return self.levels[len(path)][path_to_index(path, self.branching)]

    def nodes(self):
        for path in iter_paths(self.depth, self.branching):
            yield path, self.branch(path)

    def zero_sum_violations(self, tol=ZERO_SUM_TOLERANCE):
        """Paths of nodes whose branch vector does not sum to zero."""
        bad = []
        for k, level in enumerate(self.levels):
            scale = np.maximum(1.0, np.abs(level).sum(axis=1))
            rows = np.flatnonzero(np.abs(level.sum(axis=1)) > tol * scale)
            bad.extend(index_to_path(int(r), k, self.branching) for r in rows)
        return bad

    def validate(self, tol=ZERO_SUM_TOLERANCE):
        bad = self.zero_sum_violations(tol)
        if bad:
            raise FormatError(
                f"Branch vectors must sum to zero; violated at node(s) "
                f"{', '.join(repr(path_to_string(p)) for p in bad[:5])}"
            )
        return self

    def map_levels(self, fn):
        return MartingaleTree(tuple(fn(k, level) for k, level in enumerate(self.levels)), self.branching)

    def to_json(self):
        return {
            "depth": self.depth,
            "branching": self.branching,
            "nodes": {path_to_string(path): [float(v) for v in vector] for path, vector in self.nodes()},
        }

    @classmethod
    def from_json(cls, payload, tol=ZERO_SUM_TOLERANCE):
        require_keys(payload, ("depth", "branching", "nodes"), "Tree JSON")
        depth, branching = int(payload["depth"]), int(payload["branching"])
        _check_shape(depth, branching)
        levels = [np.zeros((branching ** k, branching)) for k in range(depth)]
        seen = set()
        for text, vector in payload["nodes"].items():
            path = string_to_path(text, branching)
            if len(path) >= depth:
                raise FormatError(f"Node '{text}' lies below the tree depth {depth}")
            if len(vector) != branching:
                raise FormatError(f"Node '{text}' must have {branching} branch values")
            levels[len(path)][path_to_index(path, branching)] = vector
            seen.add(path)
        missing = [p for p in iter_paths(depth, branching) if p not in seen]
        if missing:
            raise FormatError(f"Tree is incomplete; missing node '{path_to_string(missing[0])}'")
        return cls(tuple(levels), branching).validate(tol)

    @classmethod
    def from_function(cls, depth, branching, fn):
        """Builds a tree from fn(path) -> branch vector, node by node."""
        _check_shape(depth, branching)
        levels = []
        for k in range(depth):
            level = np.zeros((branching ** k, branching))
            for r in range(branching ** k):
                level[r] = fn(index_to_path(r, k, branching))
            levels.append(level)
        return cls(tuple(levels), branching)


@dataclass(frozen=True)
class PredictableAttachment:
    """
    A value per node: a scalar (sign v_k or threshold s_k), an N x N matrix (T_k)
    or a permutation (pi_k, 0-based). Values are indexed by the node path alone,
    so the attached sequence is predictable by construction.
    """
    kind: str
    levels: tuple
    branching: int

    def __post_init__(self):
        if self.kind not in ATTACHMENT_KINDS:
            raise FormatError(f"{self.kind} is not a valid attachment kind.  Please provide scalar, matrix, or permutation.")
        trailing = {"scalar": (), "matrix": (self.branching, self.branching), "permutation": (self.branching,)}[self.kind]
        dtype = np.int64 if self.kind == "permutation" else float
        levels = []
        for k, level in enumerate(self.levels):
            array = np.array(level, dtype=dtype)
            expected = (self.branching ** k,) + trailing
            if array.shape != expected:
                raise FormatError(f"Attachment level {k + 1} must have shape {expected}, got {array.shape}")
            if self.kind == "permutation":
                reference = np.arange(self.branching)
                if not np.all(np.sort(array, axis=1) == reference):
                    raise FormatError(f"Attachment level {k + 1} holds an invalid permutation")
            elif not np.all(np.isfinite(array)):
                raise FormatError(f"Attachment level {k + 1} has non-finite values")
            array.setflags(write=False)
            levels.append(array)
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def depth(self):
        return len(self.levels)

    def value(self, path):
        return self.levels[len(path)][path_to_index(path, self.branching)]

    def fits(self, tree):
        return self.depth == tree.depth and self.branching == tree.branching

    @classmethod
    def constant(cls, kind, depth, branching, value):
        _check_shape(depth, branching)
        value = np.asarray(value)
        levels = tuple(np.broadcast_to(value, (branching ** k,) + value.shape).copy() for k in range(depth))
        return cls(kind, levels, branching)

    @classmethod
    def from_function(cls, kind, depth, branching, fn):
        _check_shape(depth, branching)
        levels = []
        for k in range(depth):
            levels.append(np.array([fn(index_to_path(r, k, branching)) for r in range(branching ** k)]))
        return cls(kind, tuple(levels), branching)

    def to_json(self):
        def encode(value):
            if self.kind == "permutation":
                return [int(v) + 1 for v in value]
            if self.kind == "matrix":
                return np.asarray(value).tolist()
            return float(value)

        return {
            "kind": self.kind,
            "depth": self.depth,
            "branching": self.branching,
            "nodes": {path_to_string(p): encode(self.value(p)) for p in iter_paths(self.depth, self.branching)},
        }

    @classmethod
    def from_json(cls, payload):
        require_keys(payload, ("kind", "depth", "branching", "nodes"), "Attachment JSON")
        kind, depth, branching = payload["kind"], int(payload["depth"]), int(payload["branching"])
        nodes = {string_to_path(text, branching): value for text, value in payload["nodes"].items()}

        def lookup(path):
            if path not in nodes:
                raise FormatError(f"Attachment is missing node '{path_to_string(path)}'")
            value = nodes[path]
            return np.asarray(value) - 1 if kind == "permutation" else value

        return cls.from_function(kind, depth, branching, lookup)
