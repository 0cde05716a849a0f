# src/utils/matching.py

import numpy as np


def find_perfect_matching(support):
    """
    Finds a perfect matching in the bipartite graph rows -> columns whose edges
    are the True entries of `support`, by augmenting paths.

    Args:
        support (np.ndarray): square boolean matrix, support[i, j] True when row i
            may be matched to column j.

    Returns:
        np.ndarray | None: perm with perm[i] the column matched to row i, or None
            when no perfect matching exists.
    """
    support = np.asarray(support, dtype=bool)
    n = support.shape[0]
    adjacency = [np.flatnonzero(support[i]).tolist() for i in range(n)]

    # match_col[j] = row currently matched to column j, -1 when free
    match_col = [-1] * n

    def augment(row, seen):
        for col in adjacency[row]:
            if not seen[col]:
                seen[col] = True
                if match_col[col] == -1 or augment(match_col[col], seen):
                    match_col[col] = row
                    return True
        return False

    for row in range(n):
        if not augment(row, [False] * n):
            return None

    perm = np.empty(n, dtype=np.int64)
    for col, row in enumerate(match_col):
        perm[row] = col
    return perm


def complete_partial_permutation(partial, n):
    """
    Extends a partial injection rows -> columns (entries -1 for unmatched rows)
    to a full permutation by pairing the uncovered rows with the uncovered
    columns first-fit in index order.
    """
    partial = np.asarray(partial, dtype=np.int64)
    used = set(int(c) for c in partial if c >= 0)
    free_cols = [c for c in range(n) if c not in used]
    free_rows = [r for r in range(n) if partial[r] < 0]
    if len(free_cols) != len(free_rows):
        raise ValueError("Partial permutation maps two rows to the same column")

    completion = partial.copy()
    for row, col in zip(free_rows, free_cols):
        completion[row] = col
    return completion
