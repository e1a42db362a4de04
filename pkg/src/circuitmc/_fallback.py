"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

from itertools import combinations

import numpy as np


def hole_dets(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Determinants of each block with its bottom-right entry set to 0 and to 1."""
    work = np.array(blocks, dtype=np.float64, copy=True)
    work[:, -1, -1] = 0.0
    a0 = np.linalg.det(work)
    work[:, -1, -1] = 1.0
    a1 = np.linalg.det(work)
    return a0, a1


def enumerate_minors(
    mask: np.ndarray, rows: np.ndarray, cols: np.ndarray, r: int
) -> tuple[np.ndarray, np.ndarray]:
    """All (row r-subset, col r-subset) pairs whose cross block is fully observed.

    Ordered lexicographically by row subset, then column subset.
    """
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    if r < 1 or len(rows) < r or len(cols) < r:
        empty = np.empty((0, r), dtype=np.intp)
        return empty, empty.copy()
    row_sets = np.array(list(combinations(rows.tolist(), r)), dtype=np.intp)
    col_pos = np.array(list(combinations(range(len(cols)), r)), dtype=np.intp)
    # ok[a, b]: every row of subset a is observed at column cols[b]
    ok = mask[row_sets][:, :, cols].astype(bool).all(axis=1)
    valid = ok[:, col_pos].all(axis=2)
    ri, ci = np.nonzero(valid)
    return row_sets[ri], cols[col_pos[ci]]
