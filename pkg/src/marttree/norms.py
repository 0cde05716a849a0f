# src/marttree/norms.py

import math
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple
import numpy as np
from ..errors import DomainError, EnumerationCapError
from ..logger import get_logger
from ..rearrange import parse_p
from ..utils.rng import Stream, stream

logger = get_logger("marttree.norms")

ENUMERATION_CAP = 10_000_000
MIN_SAMPLES = 100
BOOTSTRAP_RESAMPLES = 200
CHUNK_SIZE = 10_000


class MonteCarloEstimate(NamedTuple):
    estimate: float
    standard_error: float
    samples: int


def _resolve_upto(tree, upto):
    if upto is None:
        return tree.depth
    upto = int(upto)
    if not 0 <= upto <= tree.depth:
        raise DomainError(f"upto must lie in 0..{tree.depth}, got {upto}")
    return upto


def _power_sum(values, p):
    """(sum |v|^p, count) or (max |v|, count) for p = inf; partial results combine associatively."""
    magnitudes = np.abs(values)
    if math.isinf(p):
        return float(magnitudes.max(initial=0.0)), magnitudes.size
    return float(np.sum(magnitudes ** p)), magnitudes.size


def _combine(parts, p):
    count = sum(size for _, size in parts)
    if math.isinf(p):
        return max(value for value, _ in parts)
    return (sum(value for value, _ in parts) / count) ** (1.0 / p)


def _subtree_partial_sums(tree, prefix, upto):
    """Partial sums S_upto over every path whose first step is `prefix`, in path order."""
    sums = np.array([tree.levels[0][0, prefix]])
    for k in range(1, upto):
        width = tree.branching ** (k - 1)
        rows = tree.levels[k][prefix * width:(prefix + 1) * width]
        sums = (sums[:, None] + rows).reshape(-1)
    return sums


def enumerate_partial_sums(tree, upto=None, cap=ENUMERATION_CAP):
    """All N**upto values of the partial sum S_upto, indexed by path."""
    upto = _resolve_upto(tree, upto)
    _check_cap(tree, upto, cap)
    if upto == 0:
        return np.zeros(1)
    return np.concatenate([_subtree_partial_sums(tree, i, upto) for i in range(tree.branching)])


def _check_cap(tree, upto, cap):
    paths = tree.branching ** upto
    if paths > cap:
        raise EnumerationCapError(paths, cap)
    return paths


def lp_norm_partial_sum(tree, p, upto=None, cap=ENUMERATION_CAP, workers=1):
    """
    Exact L_p norm of S_upto = d_1 + ... + d_upto under the uniform measure on
    paths. Work is split by first-step prefix and the partial results are
    combined in prefix order, so the value does not depend on `workers`.
    """
    p = parse_p(p)
    upto = _resolve_upto(tree, upto)
    paths = _check_cap(tree, upto, cap)
    if upto == 0:
        return 0.0

    def chunk(prefix):
        return _power_sum(_subtree_partial_sums(tree, prefix, upto), p)

    prefixes = range(tree.branching)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, prefixes))
    else:
        parts = [chunk(prefix) for prefix in prefixes]
    logger.debug("Enumerated %d paths for p=%s", paths, p)
    return float(_combine(parts, p))


def _sample_chunk(tree, upto, size, rng):
    branching = tree.branching
    steps = rng.integers(0, branching, size=(size, upto))
    rows = np.zeros(size, dtype=np.int64)
    sums = np.zeros(size)
    for k in range(upto):
        sums += tree.levels[k][rows, steps[:, k]]
        rows = rows * branching + steps[:, k]
    return sums


def _plug_in(values, p):
    if math.isinf(p):
        return float(values.max(initial=0.0))
    return float(np.mean(values) ** (1.0 / p))


def monte_carlo_lp(tree, p, samples, seed, upto=None, bootstrap=BOOTSTRAP_RESAMPLES,
                   chunk_size=CHUNK_SIZE, workers=1):
    """
    Plug-in estimate of ||S_upto||_p from i.i.d. uniform paths with a bootstrap
    standard error. Chunk c of the sample draws from the stream (seed, c), so the
    output is identical for any number of workers.
    """
    p = parse_p(p)
    samples = int(samples)
    if samples < MIN_SAMPLES:
        raise DomainError(f"Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}")
    upto = _resolve_upto(tree, upto)
    if upto == 0:
        return MonteCarloEstimate(0.0, 0.0, samples)

    sizes = [min(chunk_size, samples - start) for start in range(0, samples, chunk_size)]

    def chunk(index):
        return _sample_chunk(tree, upto, sizes[index], stream(seed, Stream.MONTE_CARLO, index))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, range(len(sizes))))
    else:
        parts = [chunk(index) for index in range(len(sizes))]
    magnitudes = np.abs(np.concatenate(parts))
    values = magnitudes if math.isinf(p) else magnitudes ** p

    estimate = _plug_in(values, p)
    if not np.any(values):
        return MonteCarloEstimate(estimate, 0.0, samples)

    rng = stream(seed, Stream.BOOTSTRAP)
    replicates = np.empty(bootstrap)
    for b in range(bootstrap):
        replicates[b] = _plug_in(values[rng.integers(0, samples, size=samples)], p)
    standard_error = float(np.std(replicates, ddof=1)) if bootstrap > 1 else 0.0
    logger.debug("Monte Carlo p=%s: %.6g +/- %.3g over %d samples", p, estimate, standard_error, samples)
    return MonteCarloEstimate(estimate, standard_error, samples)
