# src/transfer.py

from dataclasses import dataclass
import numpy as np
from .errors import DomainError, FormatError, NoTransferOperatorError
from .logger import get_logger
from .rearrange import StepFunction, rearrangement_order, weakly_majorizes
from .stochmat import is_contraction, line_abs_sums, permutation_matrix

logger = get_logger("transfer")

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TransferCertificate:
    """T with Tf = g and row/column absolute sums at most 1, plus the factors it was built from."""
    T: np.ndarray
    f: np.ndarray
    g: np.ndarray
    max_row_abs_sum: float
    max_col_abs_sum: float
    residual: float
    factors: tuple
    chain_length: int

    def to_json(self):
        return {
            "n": int(self.f.size),
            "rows": self.T.tolist(),
            "max_row_abs_sum": self.max_row_abs_sum,
            "max_col_abs_sum": self.max_col_abs_sum,
            "residual": self.residual,
            "chain_length": self.chain_length,
        }


def _as_vector(values, name):
    if isinstance(values, StepFunction):
        return np.array(values.values)
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.size == 0 or not np.all(np.isfinite(vector)):
        raise FormatError(f"{name} must be a non-empty vector of finite reals")
    return vector


def _signs(values):
    signs = np.sign(values)
    signs[signs == 0] = 1.0
    return signs


def first_violation(f_sharp, g_sharp, tol=DEFAULT_TOLERANCE):
    """
    1-based index of the first breakpoint where the K-functional of g# exceeds that of
    f# by more than tol, or None. Same comparison as weakly_majorizes, so the partial
    sums themselves may differ by up to n * tol.
    """
    n = f_sharp.size
    k_f = np.cumsum(f_sharp) / n
    k_g = np.cumsum(g_sharp) / n
    bad = np.flatnonzero(k_g > k_f + tol)
    return None if bad.size == 0 else int(bad[0]) + 1


def water_fill(f_sharp, g_sharp):
    """
    Raises the tail of g# to a common level so the total matches f#. The result h
    is non-increasing, h >= g# pointwise and h is majorized by f# with equal totals.
    """
    n = g_sharp.size
    deficit = f_sharp.sum() - g_sharp.sum()
    if deficit <= 0:
        return g_sharp.copy()
    target = f_sharp.sum()
    head = np.concatenate(([0.0], np.cumsum(g_sharp)))
    for start in range(n - 1, -1, -1):
        level = (target - head[start]) / (n - start)
        if start == 0 or (level >= g_sharp[start] and level <= g_sharp[start - 1]):
            h = g_sharp.copy()
            h[start:] = level
            return h
    return g_sharp.copy()


def t_transform_chain(x, y, scale_tol=1e-14):
    """
    T-transforms (lam I + (1 - lam) Q_jk) carrying the non-increasing vector x to
    the non-increasing vector y it majorizes, at most n - 1 of them. Each step
    takes the largest index j with x_j > y_j and the smallest k > j with x_k < y_k.

    Returns a list of (j, k, lam) in application order.
    """
    x = np.array(x, dtype=float)
    n = x.size
    eps = scale_tol * (1.0 + float(np.max(np.abs(x))))
    chain = []
    for _ in range(max(n - 1, 0)):
        gap = x - y
        above = np.flatnonzero(gap > eps)
        if above.size == 0:
            break
        j = int(above[-1])
        below = np.flatnonzero(gap[j + 1:] < -eps)
        if below.size == 0:
            break
        k = j + 1 + int(below[0])
        delta = min(x[j] - y[j], y[k] - x[k])
        spread = x[j] - x[k]
        lam = 1.0 - delta / spread
        new_j, new_k = x[j] - delta, x[k] + delta
        # snap the coordinate that reached its target
        if x[j] - y[j] <= y[k] - x[k]:
            new_j = y[j]
        else:
            new_k = y[k]
        x[j], x[k] = new_j, new_k
        chain.append((j, k, lam))
        logger.debug("T-transform %d: j=%d k=%d lambda=%.6g", len(chain), j, k, lam)
    return chain


def t_transform_matrix(n, j, k, lam):
    """lam I + (1 - lam) Q with Q the transposition of j and k."""
    matrix = np.eye(n)
    matrix[j, j] = matrix[k, k] = lam
    matrix[j, k] = matrix[k, j] = 1.0 - lam
    return matrix


def construct_transfer(f, g, tol=DEFAULT_TOLERANCE):
    """
    Builds T with Tf = g and row/column absolute sums at most 1 whenever g# is
    weakly majorized by f#, as the product of five contraction factors:
    sign-and-sort of f, a doubly stochastic T-transform chain, a diagonal shrink,
    and unsort-and-sign onto g.
    """
    f = _as_vector(f, "f")
    g = _as_vector(g, "g")
    if f.size != g.size:
        raise FormatError(f"f and g must have the same length, got {f.size} and {g.size}")
    n = f.size

    order_f = rearrangement_order(f)
    order_g = rearrangement_order(g)
    f_sharp = np.abs(f)[order_f]
    g_sharp = np.abs(g)[order_g]

    violation = first_violation(f_sharp, g_sharp, tol)
    if violation is not None:
        raise NoTransferOperatorError(violation, float(np.sum(g_sharp[:violation])),
                                      float(np.sum(f_sharp[:violation])))

    # (1) f -> f#: sign diagonal, then sorting permutation
    sort_f = permutation_matrix(order_f) @ np.diag(_signs(f))

    # (2) g# <= h, h majorized by f# with equal totals
    h = water_fill(f_sharp, g_sharp)

    # (3) h = D f# through T-transforms
    chain = t_transform_chain(f_sharp, h)
    doubly = np.eye(n)
    for j, k, lam in chain:
        doubly = t_transform_matrix(n, j, k, lam) @ doubly

    # (4) shrink h down to g#
    ratios = np.ones(n)
    positive = h > 0
    ratios[positive] = np.clip(g_sharp[positive] / h[positive], 0.0, 1.0)
    shrink = np.diag(ratios)

    # (5) g# -> g: inverse sorting permutation, then signs of g
    unsort_g = np.diag(_signs(g)) @ permutation_matrix(order_g).T

    transfer = unsort_g @ shrink @ doubly @ sort_f
    row_max, col_max = line_abs_sums(transfer)
    residual = float(np.max(np.abs(transfer @ f - g)))
    logger.debug("Transfer operator built with %d T-transforms, residual %.3g", len(chain), residual)

    factors = (
        ("sort_f", sort_f),
        ("t_transforms", doubly),
        ("shrink", shrink),
        ("unsort_g", unsort_g),
    )
    return TransferCertificate(transfer, f, g, row_max, col_max, residual, factors, len(chain))


def verify_only_if(T, f, tol=DEFAULT_TOLERANCE):
    """A contraction on l1 and l_inf never increases the K-functional: (Tf)# is majorized by f#."""
    T = np.asarray(T, dtype=float)
    f = _as_vector(f, "f")
    if T.ndim != 2 or T.shape != (f.size, f.size):
        raise FormatError(f"T must be {f.size}x{f.size}, got shape {T.shape}")
    if not is_contraction(T, tol):
        row_max, col_max = line_abs_sums(T)
        raise DomainError(f"T must have row and column absolute sums at most 1, got {row_max:.6g} / {col_max:.6g}")
    return weakly_majorizes(StepFunction(f), StepFunction(T @ f), tol)
