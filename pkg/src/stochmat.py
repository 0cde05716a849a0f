# src/stochmat.py

from dataclasses import dataclass, field
from enum import Enum
import numpy as np
from .errors import DecompositionError, DomainError, FormatError
from .logger import get_logger
from .utils.matching import complete_partial_permutation, find_perfect_matching

logger = get_logger("stochmat")

DEFAULT_TOLERANCE = 1e-9
# residual entries at or below this (per unit of dimension) count as zero
RESIDUAL_ZERO = 1e-12
THETA_DROP = 1e-12
RESCALE_LIMIT = 1e-9


class Classification(str, Enum):
    DOUBLY_STOCHASTIC = "DoublyStochastic"
    SUB_DOUBLY_STOCHASTIC = "SubDoublyStochastic"
    ZERO_SUM_CONTRACTION = "ZeroSumContraction"
    GENERAL = "General"


def _as_square(entries):
    try:
        matrix = np.array(entries, dtype=float)
    except (TypeError, ValueError) as e:
        raise FormatError(f"Matrix entries must be real numbers: {e}")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise FormatError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise FormatError("Matrix entries must be finite")
    return matrix


def line_abs_sums(matrix):
    """(max row absolute sum, max column absolute sum)."""
    magnitudes = np.abs(np.asarray(matrix, dtype=float))
    return float(magnitudes.sum(axis=1).max()), float(magnitudes.sum(axis=0).max())


def is_contraction(matrix, tol=DEFAULT_TOLERANCE):
    """Row and column absolute sums at most 1 (norm <= 1 on both l1 and l_inf)."""
    row_max, col_max = line_abs_sums(matrix)
    return row_max <= 1 + tol and col_max <= 1 + tol


def _doubly_stochastic(matrix, tol):
    return (np.all(matrix >= -tol)
            and np.all(np.abs(matrix.sum(axis=1) - 1) <= tol)
            and np.all(np.abs(matrix.sum(axis=0) - 1) <= tol))


def _sub_doubly_stochastic(matrix, tol):
    return (np.all(matrix >= -tol)
            and np.all(matrix.sum(axis=1) <= 1 + tol)
            and np.all(matrix.sum(axis=0) <= 1 + tol))


def _zero_sum_contraction(matrix, tol):
    return (np.all(np.abs(matrix.sum(axis=1)) <= tol)
            and np.all(np.abs(matrix.sum(axis=0)) <= tol)
            and _sub_doubly_stochastic(np.abs(matrix), tol))


@dataclass(frozen=True)
class ContractionMatrix:
    entries: np.ndarray
    classification: Classification
    tol: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self):
        return self.entries.shape[0]

    def is_doubly_stochastic(self):
        return bool(_doubly_stochastic(self.entries, self.tol))

    def is_sub_doubly_stochastic(self):
        return bool(_sub_doubly_stochastic(self.entries, self.tol))

    def is_zero_sum_contraction(self):
        return bool(_zero_sum_contraction(self.entries, self.tol))

    def to_json(self):
        return {
            "n": self.n,
            "rows": self.entries.tolist(),
            "classification": self.classification.value,
        }

    @classmethod
    def from_json(cls, payload, tol=DEFAULT_TOLERANCE):
        if not isinstance(payload, dict) or "rows" not in payload:
            raise FormatError("Matrix JSON must be an object with a 'rows' list")
        matrix = classify(payload["rows"], tol)
        if "n" in payload and int(payload["n"]) != matrix.n:
            raise FormatError(f"Matrix declares n={payload['n']} but has {matrix.n} rows")
        return matrix


def classify(entries, tol=DEFAULT_TOLERANCE):
    """
    Assigns the most specific classification. Doubly stochastic takes precedence
    over sub-doubly stochastic, which takes precedence over zero-sum contraction
    (only the zero matrix satisfies both of the latter).
    """
    matrix = _as_square(entries)
    if _doubly_stochastic(matrix, tol):
        label = Classification.DOUBLY_STOCHASTIC
    elif _sub_doubly_stochastic(matrix, tol):
        label = Classification.SUB_DOUBLY_STOCHASTIC
    elif _zero_sum_contraction(matrix, tol):
        label = Classification.ZERO_SUM_CONTRACTION
    else:
        label = Classification.GENERAL
    return ContractionMatrix(matrix, label, tol)


def _coerce(matrix, tol):
    if isinstance(matrix, ContractionMatrix):
        return matrix
    return classify(matrix, tol)


def permutation_matrix(perm):
    """P with P[i, perm[i]] = 1, so (P d)(i) = d[perm[i]]."""
    perm = np.asarray(perm, dtype=np.int64)
    matrix = np.zeros((perm.size, perm.size))
    matrix[np.arange(perm.size), perm] = 1.0
    return matrix


@dataclass(frozen=True)
class SignedPermutationCombination:
    """sum_i theta_i P_i with permutations stored 0-based (perm[i] = image of row i)."""
    terms: tuple
    n: int
    residual_max: float = field(default=0.0)

    @property
    def thetas(self):
        return np.array([theta for theta, _ in self.terms])

    def reconstruct(self):
        return reconstruct(self, self.n)

    def apply(self, vector):
        vector = np.asarray(vector, dtype=float)
        result = np.zeros(self.n)
        for theta, perm in self.terms:
            result += theta * vector[np.asarray(perm)]
        return result

    def to_json(self):
        return {
            "terms": [
                {"theta": float(theta), "perm": [int(j) + 1 for j in perm]}
                for theta, perm in self.terms
            ],
            "residual_max": float(self.residual_max),
        }


def reconstruct(combination, n):
    matrix = np.zeros((n, n))
    for theta, perm in combination.terms:
        matrix[np.arange(n), np.asarray(perm)] += theta
    return matrix


def _birkhoff_terms(matrix, zero_tol, slack=0.0):
    """
    Greedy Birkhoff loop on a (scaled) doubly stochastic matrix: find a permutation
    on the support, subtract the minimum entry along it, repeat until the residual
    is zero. Returns the raw (theta, perm) list and the final residual.
    """
    n = matrix.shape[0]
    residual = np.where(matrix > zero_tol, matrix, 0.0)
    stop = n * zero_tol
    terms = []
    rows = np.arange(n)

    while residual.max() > stop:
        perm = find_perfect_matching(residual > 0.0)
        if perm is None and residual.max() <= slack:
            # leftover from an input that is doubly stochastic only within tolerance
            break
        if perm is None:
            raise DecompositionError(
                f"No perfect matching on a residual with max entry {residual.max():.3g}; "
                f"the input is not doubly stochastic within tolerance"
            )
        along = residual[rows, perm]
        theta = float(along.min())
        pivot = int(np.argmin(along))
        residual[rows, perm] -= theta
        residual[pivot, perm[pivot]] = 0.0
        residual[residual <= zero_tol] = 0.0
        terms.append((theta, tuple(int(j) for j in perm)))
        logger.debug("Birkhoff step %d: theta=%.6g", len(terms), theta)

    return terms, residual


def birkhoff_decompose(matrix, tol=DEFAULT_TOLERANCE, zero_tol=RESIDUAL_ZERO):
    """Writes a doubly stochastic matrix as a convex combination of permutations."""
    matrix = _coerce(matrix, tol)
    if not matrix.is_doubly_stochastic():
        raise DomainError(f"Birkhoff decomposition needs a doubly stochastic matrix, got {matrix.classification.value}")
    return _decompose_doubly_stochastic(matrix.entries, zero_tol, matrix.tol)


def _decompose_doubly_stochastic(entries, zero_tol=RESIDUAL_ZERO, slack=DEFAULT_TOLERANCE):
    terms, _ = _birkhoff_terms(entries, zero_tol, slack)
    total = sum(theta for theta, _ in terms)
    if total > 0:
        terms = [(theta / total, perm) for theta, perm in terms]
    n = entries.shape[0]
    combination = SignedPermutationCombination(tuple(terms), n)
    residual_max = float(np.max(np.abs(reconstruct(combination, n) - entries)))
    logger.debug("Birkhoff decomposition of %dx%d matrix: %d terms", n, n, len(terms))
    return SignedPermutationCombination(tuple(terms), n, residual_max)


def embed_double(matrix, tol=DEFAULT_TOLERANCE):
    """
    Embeds a sub-doubly stochastic n x n matrix M as the upper-left block of the
    2n x 2n doubly stochastic matrix [[M, A], [B, C]] with A[i, :] = (1-R(i))/n,
    B[:, j] = (1-C(j))/n and C = Diag(S/n).
    """
    matrix = _coerce(matrix, tol)
    if not matrix.is_sub_doubly_stochastic():
        raise DomainError(f"Embedding needs a sub-doubly stochastic matrix, got {matrix.classification.value}")
    m = matrix.entries
    n = matrix.n
    row_sums = m.sum(axis=1)
    col_sums = m.sum(axis=0)
    total = m.sum()

    a_block = np.repeat(((1.0 - row_sums) / n)[:, None], n, axis=1)
    b_block = np.repeat(((1.0 - col_sums) / n)[None, :], n, axis=0)
    c_block = np.eye(n) * (total / n)
    embedded = np.block([[m, a_block], [b_block, c_block]])
    return classify(embedded, tol)


def _completion(entries, tol, zero_tol):
    n = entries.shape[0]
    embedded = embed_double(classify(entries, tol), tol)
    big = _decompose_doubly_stochastic(embedded.entries, zero_tol)
    completion = np.zeros((n, n))
    for theta, perm in big.terms:
        # upper-left sub-permutation, then first-fit completion of the rest
        partial = np.array([c if c < n else -1 for c in perm[:n]], dtype=np.int64)
        full = complete_partial_permutation(partial, n)
        for row in np.flatnonzero(partial < 0):
            completion[row, full[row]] += theta
    return completion


def complete_to_double(matrix, tol=DEFAULT_TOLERANCE, zero_tol=RESIDUAL_ZERO):
    """Returns a sub-doubly stochastic N with M + N doubly stochastic."""
    matrix = _coerce(matrix, tol)
    if not matrix.is_sub_doubly_stochastic():
        raise DomainError(f"Completion needs a sub-doubly stochastic matrix, got {matrix.classification.value}")
    return classify(_completion(matrix.entries, tol, zero_tol), tol)


def _merge_terms(terms):
    merged = {}
    for theta, perm in terms:
        merged[perm] = merged.get(perm, 0.0) + theta
    return [(theta, perm) for perm, theta in merged.items() if abs(theta) >= THETA_DROP]


def signed_decompose(matrix, tol=DEFAULT_TOLERANCE, zero_tol=RESIDUAL_ZERO):
    """
    Writes a zero-sum contraction M (zero row and column sums, |M| sub-doubly
    stochastic) as sum_i theta_i P_i with sum theta_i = 0 and sum |theta_i| = 1.
    """
    matrix = _coerce(matrix, tol)
    if not matrix.is_zero_sum_contraction():
        raise DomainError(f"Signed decomposition needs a zero-sum contraction, got {matrix.classification.value}")
    m = matrix.entries
    n = matrix.n
    positive = (np.abs(m) + m) / 2
    negative = (np.abs(m) - m) / 2

    # 2(A + C) and 2(B + C) are doubly stochastic for the same completion C
    completion = _completion(2 * positive, tol, zero_tol)
    plus = _decompose_doubly_stochastic(2 * positive + completion, zero_tol)
    minus = _decompose_doubly_stochastic(2 * negative + completion, zero_tol)

    # merge within a sign only; cancelling across signs would break sum |theta| = 1
    plus_terms = _merge_terms([(theta / 2, perm) for theta, perm in plus.terms])
    minus_terms = _merge_terms([(-theta / 2, perm) for theta, perm in minus.terms])
    terms = plus_terms + minus_terms

    mass = sum(abs(theta) for theta, _ in terms)
    if mass > 0 and abs(mass - 1.0) < RESCALE_LIMIT:
        terms = [(theta / mass, perm) for theta, perm in terms]

    combination = SignedPermutationCombination(tuple(terms), n)
    residual_max = float(np.max(np.abs(reconstruct(combination, n) - m)))
    logger.debug("Signed decomposition: %d terms, residual %.3g", len(terms), residual_max)
    return SignedPermutationCombination(tuple(terms), n, residual_max)


def center_rows(matrix):
    """T' = [a(i,j) - R(i)/n]: zero row sums, same action on zero-sum vectors."""
    matrix = _as_square(matrix)
    return matrix - matrix.sum(axis=1, keepdims=True) / matrix.shape[0]


def center_cols(matrix):
    """T'' = [a(i,j) - C(j)/n]: zero column sums, same action when Td is zero-sum."""
    matrix = _as_square(matrix)
    return matrix - matrix.sum(axis=0, keepdims=True) / matrix.shape[0]
