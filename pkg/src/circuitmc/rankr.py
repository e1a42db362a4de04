"""General-rank local completion (vm-Closure) from almost-complete minors.

Each ``(r+1) x (r+1)`` submatrix through the target whose other entries are all
observed has a determinant that is affine in the target; its root is one
candidate. Candidates are combined with weights ``1/delta**2`` where ``delta``
is a first-order error proxy computed from the two determinants ``a0``
(hole = 0) and ``a1`` (hole = 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Literal

import numpy as np

from . import _backend
from .core import (
    Completion,
    DegenerateMinorError,
    EntryEstimate,
    InvalidInputError,
    MaskedMatrix,
    UnestimableError,
    combine_min_variance,
)
from .rank1 import faccro_entry

WeightingMode = Literal["additive", "multiplicative"]

ENUMERATION_LIMIT = 1_000_000
REJECTION_FACTOR = 50

_MODE_ALIASES = {
    "additive": "additive",
    "add": "additive",
    "multiplicative": "multiplicative",
    "mult": "multiplicative",
}


def _mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise InvalidInputError(f"unknown weighting mode {mode!r}") from None


@dataclass(frozen=True)
class ClosureConfig:
    rank: int = 2
    iterations: int = 100
    degeneracy_tol: float = 1e-12
    weighting_mode: WeightingMode = "multiplicative"
    rank_fallback: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInputError("target rank must be >= 1")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be >= 1")
        if not self.degeneracy_tol > 0:
            raise InvalidInputError("degeneracy_tol must be positive")
        object.__setattr__(self, "weighting_mode", _mode(self.weighting_mode))


def _entry_rng(seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng([abs(int(seed)), int(i), int(j)])


def _sample_minors(mask, rows, cols, r, iterations, rng):
    # Sequential rejection sampling of distinct subsets, in chunks.
    found: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    seen = set()
    rejections = 0
    cap = REJECTION_FACTOR * iterations
    while len(found) < iterations and rejections < cap:
        k = iterations
        rsel = np.sort(rows[np.argsort(rng.random((k, len(rows))), axis=1)[:, :r]], axis=1)
        csel = np.sort(cols[np.argsort(rng.random((k, len(cols))), axis=1)[:, :r]], axis=1)
        ok = mask[rsel[:, :, None], csel[:, None, :]].all(axis=(1, 2))
        for a in range(k):
            key = (tuple(rsel[a].tolist()), tuple(csel[a].tolist()))
            if ok[a] and key not in seen:
                seen.add(key)
                found.append(key)
                if len(found) == iterations:
                    break
            else:
                rejections += 1
                if rejections >= cap:
                    break
    rs = np.array([f[0] for f in found], dtype=np.intp).reshape(-1, r)
    cs = np.array([f[1] for f in found], dtype=np.intp).reshape(-1, r)
    return rs, cs


def _minor_index_sets(A: MaskedMatrix, i: int, j: int, rank: int, iterations: int, seed: int):
    m, n = A.shape
    if rank < 1 or rank + 1 > min(m, n):
        raise InvalidInputError(f"rank {rank} needs at least {rank + 1} rows and columns")
    if not (0 <= i < m and 0 <= j < n):
        raise InvalidInputError(f"index ({i}, {j}) outside {A.shape}")
    M = A.mask
    rows = np.flatnonzero(M[:, j])
    rows = rows[rows != i]
    cols = np.flatnonzero(M[i])
    cols = cols[cols != j]
    empty = np.empty((0, rank + 1), dtype=np.intp)
    if len(rows) < rank or len(cols) < rank:
        return empty, empty.copy()
    rng = _entry_rng(seed, i, j)
    if comb(len(rows), rank) * comb(len(cols), rank) <= ENUMERATION_LIMIT:
        rs, cs = _backend.enumerate_minors(M, rows, cols, rank)
        if len(rs) > iterations:
            pick = np.sort(rng.choice(len(rs), size=iterations, replace=False))
            rs, cs = rs[pick], cs[pick]
    else:
        rs, cs = _sample_minors(M, rows, cols, rank, iterations, rng)
    k = len(rs)
    rs = np.hstack([rs, np.full((k, 1), i, dtype=np.intp)])
    cs = np.hstack([cs, np.full((k, 1), j, dtype=np.intp)])
    return rs, cs


def find_minors(
    A: MaskedMatrix, i: int, j: int, rank: int, iterations: int, seed: int = 0
) -> list[tuple[list[int], list[int]]]:
    """Up to ``iterations`` distinct almost-complete minors through ``(i, j)``.

    Each minor is ``(row_ids, col_ids)`` with ``i`` and ``j`` last, so the hole
    sits at the bottom-right. When at most ``ENUMERATION_LIMIT`` row/column
    subset pairs exist, all valid minors are enumerated and a seeded random
    subset is kept; otherwise subsets are drawn at random with rejection,
    giving up after ``50 * iterations`` rejections.
    """
    rs, cs = _minor_index_sets(A, i, j, rank, iterations, seed)
    return [(r.tolist(), c.tolist()) for r, c in zip(rs, cs)]


def _degeneracy_scale(blocks: np.ndarray, tol: float) -> np.ndarray:
    s = blocks.shape[-1]
    body = np.abs(blocks).copy()
    body[:, -1, -1] = 0.0
    return tol * (body.max(axis=(1, 2)) + 1.0) ** s


def solve_minor(B, degeneracy_tol: float = 1e-12) -> tuple[float, float, float]:
    """Root of the determinant of ``B`` as a function of its bottom-right entry.

    Returns ``(a0, a1, x)`` with ``a0 = det(B | hole=0)``, ``a1 = det(B | hole=1)``
    and ``x = -a0 / (a1 - a0)``. Whatever ``B`` holds at the hole is ignored.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] < 2:
        raise InvalidInputError("minor must be a square grid of size >= 2")
    blocks = B[None].copy()
    a0, a1 = _backend.hole_dets(blocks)
    a0, a1 = float(a0[0]), float(a1[0])
    limit = float(_degeneracy_scale(blocks, degeneracy_tol)[0])
    if not abs(a1 - a0) > limit:
        raise DegenerateMinorError(f"|a1 - a0| = {abs(a1 - a0):.3g} below {limit:.3g}")
    return a0, a1, -a0 / (a1 - a0)


def minor_weight(a0: float, a1: float, mode: str = "additive", tol: float = 0.0) -> float:
    """First-order error proxy of a minor solution.

    additive:       1/|a1 - a0| + |a0|/(a1 - a0)**2
    multiplicative: 1/|a0| + 1/|a1 - a0|   (error of the log of the solution)
    """
    mode = _mode(mode)
    g = abs(a1 - a0)
    if not g > tol:
        raise DegenerateMinorError("cofactor below tolerance")
    if mode == "additive":
        return 1.0 / g + abs(a0) / g**2
    if not abs(a0) > tol:
        raise DegenerateMinorError("|a0| below tolerance in multiplicative mode")
    return 1.0 / abs(a0) + 1.0 / g


def _weights(a0: np.ndarray, a1: np.ndarray, mode: str) -> np.ndarray:
    g = np.abs(a1 - a0)
    if mode == "additive":
        return 1.0 / g + np.abs(a0) / g**2
    return 1.0 / np.abs(a0) + 1.0 / g


def _solve_at_rank(A: MaskedMatrix, i: int, j: int, rank: int, config: ClosureConfig):
    rs, cs = _minor_index_sets(A, i, j, rank, config.iterations, config.seed)
    if len(rs) == 0:
        return None
    blocks = A.values[rs[:, :, None], cs[:, None, :]]
    a0, a1 = _backend.hole_dets(blocks)
    limit = _degeneracy_scale(blocks, config.degeneracy_tol)
    ok = np.abs(a1 - a0) > limit
    if config.weighting_mode == "multiplicative":
        ok &= np.abs(a0) > limit
    ok &= np.isfinite(a0) & np.isfinite(a1)
    if not ok.any():
        return None
    a0, a1 = a0[ok], a1[ok]
    x = -a0 / (a1 - a0)
    delta = _weights(a0, a1, config.weighting_mode)
    value = combine_min_variance(np.column_stack([x, delta]))
    dmin = delta.min()
    proxy = dmin / np.sqrt(np.sum((dmin / delta) ** 2))
    return EntryEstimate(
        row=int(i), col=int(j), value=value, variance_proxy=float(proxy),
        support=int(ok.sum()), rank=rank,
    )


def vmclosure_entry(A: MaskedMatrix, i: int, j: int, config: ClosureConfig) -> EntryEstimate:
    """Variance-weighted combination of minor solutions for entry ``(i, j)``.

    With ``rank_fallback`` the target rank is lowered one step at a time until
    some minor survives; a retry at rank 1 uses ``faccro_entry``.
    """
    if A.n_observed == 0:
        raise InvalidInputError("matrix has no observed entries")
    if config.weighting_mode == "multiplicative":
        A.require_positive()
    lowest = 1 if config.rank_fallback else config.rank
    for rank in range(config.rank, lowest - 1, -1):
        if rank == 1 and config.rank > 1:
            try:
                return faccro_entry(A, i, j)
            except UnestimableError:
                break
        if rank + 1 > min(A.shape):
            continue
        est = _solve_at_rank(A, i, j, rank, config)
        if est is not None:
            return est
    raise UnestimableError(f"no usable minor through ({i}, {j}) at rank <= {config.rank}")


def vmclosure_all(A: MaskedMatrix, config: ClosureConfig) -> Completion:
    """Run ``vmclosure_entry`` on every missing entry.

    Unestimable entries get the observed mean and are flagged.
    """
    if A.n_observed == 0:
        raise InvalidInputError("matrix has no observed entries")
    if config.weighting_mode == "multiplicative":
        A.require_positive()
    out = A.values.copy()
    unestimable = np.zeros(A.shape, dtype=bool)
    support = np.zeros(A.shape, dtype=np.int64)
    rank_used = np.zeros(A.shape, dtype=np.int64)
    fill = A.observed_mean()
    for i, j in np.argwhere(~A.mask):
        try:
            est = vmclosure_entry(A, int(i), int(j), config)
        except UnestimableError:
            out[i, j] = fill
            unestimable[i, j] = True
            continue
        out[i, j] = est.value
        support[i, j] = est.support
        rank_used[i, j] = est.rank
    return Completion(values=out, unestimable=unestimable, support=support, rank_used=rank_used)
