"""Fast rank-1 local completion (fACCRO) in log space via 2x2 minors.

For a target ``(i, j)`` every observed pivot ``A[i, l]`` yields the candidate
``A[i, l] * b_l`` where ``log b_l`` is the ``A[k, l]``-weighted mean of
``log A[k, j] - log A[k, l]`` over rows ``k`` observing both columns. The
candidates are averaged in log space with weights ``A[i, l]``.
"""

from __future__ import annotations

import numpy as np

from .core import Completion, EntryEstimate, InvalidInputError, MaskedMatrix, UnestimableError


def _check(A: MaskedMatrix) -> None:
    if A.n_observed == 0:
        raise InvalidInputError("matrix has no observed entries")
    A.require_positive()


def faccro_entry(A: MaskedMatrix, i: int, j: int) -> EntryEstimate:
    """Estimate entry ``(i, j)`` from every length-4 circuit through it.

    If ``(i, j)`` is itself observed it joins as one more candidate with weight
    ``A[i, j]``. The variance proxy is ``1/support``; it orders estimates by
    how many circuits back them and is not a calibrated variance.
    """
    _check(A)
    m, n = A.shape
    if not (0 <= i < m and 0 <= j < n):
        raise InvalidInputError(f"index ({i}, {j}) outside {A.shape}")
    M, V = A.mask, A.values
    logs, weights = [], []
    for l in np.flatnonzero(M[i]):
        if l == j:
            continue
        rows = M[:, l] & M[:, j]
        rows[i] = False
        if not rows.any():
            continue
        w = V[rows, l] / V[rows, l].sum()
        log_b = w @ (np.log(V[rows, j]) - np.log(V[rows, l]))
        logs.append(np.log(V[i, l]) + log_b)
        weights.append(V[i, l])
    if M[i, j]:
        logs.append(np.log(V[i, j]))
        weights.append(V[i, j])
    if not logs:
        raise UnestimableError(f"no solving circuit reaches ({i}, {j})")
    weights = np.asarray(weights)
    value = float(np.exp(weights @ np.asarray(logs) / weights.sum()))
    return EntryEstimate(
        row=int(i), col=int(j), value=value, variance_proxy=1.0 / len(logs), support=len(logs)
    )


def pair_log_ratios(A: MaskedMatrix) -> tuple[np.ndarray, np.ndarray]:
    """``log b`` for every column pair ``(l, j)`` plus its validity mask.

    ``log_b[l, j]`` uses all rows observing both columns; this is the shared
    quantity that lets every missing entry of column ``j`` reuse it.
    """
    M = A.mask.astype(np.float64)
    W = A.values  # zero where unobserved
    L = np.zeros(A.shape)
    np.log(A.values, out=L, where=A.mask)
    denom = W.T @ M
    numer = W.T @ (M * L) - (W * L).T @ M
    valid = denom > 0
    log_b = np.divide(numer, denom, out=np.zeros_like(numer), where=valid)
    return log_b, valid


def faccro_all(A: MaskedMatrix) -> Completion:
    """Complete every missing entry with fACCRO.

    Observed entries pass through. Entries with no solving circuit get the
    geometric mean of the observed entries and are flagged ``unestimable``.
    """
    _check(A)
    W = A.values
    L = np.zeros(A.shape)
    np.log(A.values, out=L, where=A.mask)
    log_b, valid = pair_log_ratios(A)
    vf = valid.astype(np.float64)
    # sums over pivots l: weight A[i,l] on log A[i,l] + log b[l,j]
    weight_sum = W @ vf
    numer = (W * L) @ vf + W @ (vf * log_b)
    support = A.mask.astype(np.int64) @ valid.astype(np.int64)

    missing = ~A.mask
    reached = missing & (weight_sum > 0)
    unestimable = missing & ~reached
    out = A.values.copy()
    out[reached] = np.exp(numer[reached] / weight_sum[reached])
    if unestimable.any():
        out[unestimable] = np.exp(L[A.mask].mean())
    support = np.where(reached, support, 0)
    return Completion(values=out, unestimable=unestimable, support=support)
