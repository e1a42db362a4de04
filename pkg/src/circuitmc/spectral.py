"""Spectral meta-algorithms: SMCB row projection, alternating refinement,
rank estimation and singular-spectrum diagnostics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, MaskedMatrix

log = logging.getLogger(__name__)

PINV_RCOND = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    rank: int
    right_vectors: np.ndarray  # n x r, orthonormal columns
    singular_values: np.ndarray


def spectral_basis(A_filled, rank: int) -> SpectralBasis:
    X = np.asarray(A_filled, dtype=np.float64)
    if not 1 <= rank <= min(X.shape):
        raise InvalidInputError(f"rank {rank} outside [1, {min(X.shape)}]")
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    return SpectralBasis(rank=rank, right_vectors=vt[:rank].T.copy(), singular_values=s[:rank])


def _check_init(A: MaskedMatrix, A_init) -> np.ndarray:
    init = np.asarray(A_init, dtype=np.float64)
    if init.shape != A.shape:
        raise InvalidInputError(f"initial estimate {init.shape} does not match {A.shape}")
    if not np.all(np.isfinite(init)):
        raise InvalidInputError("initial estimate must be complete and finite")
    return init


def smcb(A: MaskedMatrix, A_init, rank: int) -> np.ndarray:
    """Spectral matrix completion bootstrap.

    Takes the top ``rank`` right singular vectors of ``A_init`` and refits
    each row of ``A`` on them by least squares over its observed entries.
    Observed entries are kept verbatim; rows with no observed entry are
    copied from ``A_init``.
    """
    init = _check_init(A, A_init)
    V = spectral_basis(init, rank).right_vectors
    out = A.values.copy()
    for i in range(A.rows):
        obs = A.mask[i]
        if obs.all():
            continue
        if not obs.any():
            out[i] = init[i]
            continue
        coef = A.values[i, obs] @ np.linalg.pinv(V[obs].T, rcond=PINV_RCOND)
        out[i, ~obs] = V[~obs] @ coef
    return out


@dataclass(frozen=True)
class RefineConfig:
    rank: int
    max_iters: int = 200
    rel_tol: float = 1e-8
    ridge: float = 0.0

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInputError("rank must be >= 1")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise InvalidInputError("rel_tol must be positive")
        if self.ridge < 0:
            raise InvalidInputError("ridge must be nonnegative")


@dataclass
class RefineResult:
    values: np.ndarray
    objective: list[float]
    deficient_rows: np.ndarray
    deficient_cols: np.ndarray
    iterations: int = 0
    converged: bool = False


def _objective(mask, data, X, Y, ridge):
    resid = np.where(mask, X @ Y.T - data, 0.0)
    val = float(np.sum(resid**2))
    if ridge:
        val += ridge * (float(np.sum(X**2)) + float(np.sum(Y**2)))
    return val


def _solve_factor(mask, data, other, ridge):
    """Row-wise least squares: row ``i`` minimises over its observed columns."""
    m = mask.shape[0]
    r = other.shape[1]
    w = mask.astype(np.float64)
    gram = np.einsum("ij,jk,jl->ikl", w, other, other)
    rhs = (w * data) @ other
    if ridge:
        gram += ridge * np.eye(r)
    counts = mask.sum(axis=1)
    deficient = counts < r
    out = np.empty((m, r))
    good = ~deficient
    if ridge == 0:
        # near-singular Gram matrices also go through lstsq
        cond = np.linalg.cond(gram[good]) if good.any() else np.empty(0)
        bad = np.flatnonzero(good)[~(cond < 1e10)]
        good[bad] = False
    if good.any():
        out[good] = np.linalg.solve(gram[good], rhs[good][:, :, None])[:, :, 0]
    for i in np.flatnonzero(~good):
        obs = mask[i]
        design = other[obs]
        target = data[i, obs]
        if ridge:
            design = np.vstack([design, np.sqrt(ridge) * np.eye(r)])
            target = np.concatenate([target, np.zeros(r)])
        out[i] = np.linalg.lstsq(design, target, rcond=None)[0]
    return out, deficient


def refine_trace(A: MaskedMatrix, A_init, config: RefineConfig) -> RefineResult:
    """Alternating least squares on the observed entries, started from ``A_init``.

    ``A_init`` is first truncated to rank ``config.rank``; its factors then
    alternate between exact row and column solves. ``objective`` holds the
    observed-entry squared error (plus ridge term) before the first sweep and
    after each sweep; it is nonincreasing.
    """
    init = _check_init(A, A_init)
    r = config.rank
    if r > min(A.shape):
        raise InvalidInputError(f"rank {r} exceeds matrix dimensions {A.shape}")
    u, s, vt = np.linalg.svd(init, full_matrices=False)
    root = np.sqrt(s[:r])
    X = u[:, :r] * root
    Y = vt[:r].T * root
    mask, data = A.mask, A.values
    obj = [_objective(mask, data, X, Y, config.ridge)]
    converged = False
    it = 0
    def_rows = def_cols = np.zeros(0, dtype=bool)
    for it in range(1, config.max_iters + 1):
        X_new, def_rows = _solve_factor(mask, data, Y, config.ridge)
        Y_new, def_cols = _solve_factor(mask.T, data.T, X_new, config.ridge)
        cur = _objective(mask, data, X_new, Y_new, config.ridge)
        prev = obj[-1]
        if cur > prev:
            # rounding only; an exact sweep cannot increase the objective
            converged = True
            break
        X, Y = X_new, Y_new
        obj.append(cur)
        if prev == 0 or (prev - cur) <= config.rel_tol * prev:
            converged = True
            break
    if def_rows.any() or def_cols.any():
        log.debug(
            "refine: %d rows and %d columns have fewer than %d observations",
            int(def_rows.sum()), int(def_cols.sum()), r,
        )
    return RefineResult(
        values=X @ Y.T,
        objective=obj,
        deficient_rows=def_rows,
        deficient_cols=def_cols,
        iterations=it,
        converged=converged,
    )


def refine(A: MaskedMatrix, A_init, config: RefineConfig) -> np.ndarray:
    """Meta-OptSpace refinement; see ``refine_trace``."""
    return refine_trace(A, A_init, config).values


def singular_values(A_filled) -> np.ndarray:
    return np.linalg.svd(np.asarray(A_filled, dtype=np.float64), compute_uv=False)


def estimate_rank(A_filled, max_rank: int) -> int:
    """Rank with the largest relative spectral drop ``(s_k - s_k+1)/(s_k+1 + tau)``."""
    s = singular_values(A_filled)
    if not 1 <= max_rank < len(s):
        raise InvalidInputError(f"max_rank must lie in [1, {len(s) - 1}]")
    tau = 1e-12 * s[0] if s[0] > 0 else 1e-300
    ratios = (s[:max_rank] - s[1 : max_rank + 1]) / (s[1 : max_rank + 1] + tau)
    return int(np.argmax(ratios)) + 1


def spectral_gaps(A_filled, count: int) -> np.ndarray:
    """``[s2 - s3, s3 - s4, ...]`` with ``count`` entries."""
    s = singular_values(A_filled)
    if count < 1 or count + 2 > len(s):
        raise InvalidInputError(f"count must lie in [1, {len(s) - 2}]")
    return s[1 : count + 1] - s[2 : count + 2]


def singular_vector_alignment(estimate, truth, k: int) -> float:
    """``|<v_k(estimate), v_k(truth)>|`` for the k-th (1-based) right singular vectors."""
    est = np.asarray(estimate, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    if est.shape != tru.shape:
        raise InvalidInputError("shape mismatch")
    if not 1 <= k <= min(est.shape):
        raise InvalidInputError(f"k must lie in [1, {min(est.shape)}]")
    v_est = np.linalg.svd(est, full_matrices=False)[2][k - 1]
    v_tru = np.linalg.svd(tru, full_matrices=False)[2][k - 1]
    return float(min(1.0, abs(v_est @ v_tru)))


def zero_fill_svd(A: MaskedMatrix, rank: int) -> np.ndarray:
    """Rank-``rank`` SVD truncation of the zero-filled matrix."""
    return truncate(A.values, rank)


def mean_fill_svd(A: MaskedMatrix, rank: int) -> np.ndarray:
    """Rank-``rank`` SVD truncation of the mean-filled matrix."""
    return truncate(A.mean_fill(), rank)


def truncate(X, rank: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if not 1 <= rank <= min(X.shape):
        raise InvalidInputError(f"rank {rank} outside [1, {min(X.shape)}]")
    u, s, vt = np.linalg.svd(X, full_matrices=False)
    return (u[:, :rank] * s[:rank]) @ vt[:rank]
