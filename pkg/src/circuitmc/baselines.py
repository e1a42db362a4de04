"""Comparison methods: nuclear-norm completion by singular value thresholding
with a cross-validated regularisation weight, and the Riegel race-time formula."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .core import Completion, InvalidInputError, MaskedMatrix

RIEGEL_EXPONENT = 1.06


@dataclass(frozen=True)
class SvtConfig:
    """``lambda_grid=None`` selects 8 log-spaced values in [1e-3, 1] * s1(zero-filled A)."""

    lambda_grid: tuple[float, ...] | None = None
    holdout_fraction: float = 0.2
    max_iters: int = 300
    rel_tol: float = 1e-5
    step: float = 1.0

    def __post_init__(self):
        if self.lambda_grid is not None:
            grid = tuple(float(x) for x in self.lambda_grid)
            if not grid:
                raise InvalidInputError("lambda grid is empty")
            if any(not x > 0 for x in grid):
                raise InvalidInputError("lambda values must be positive")
            object.__setattr__(self, "lambda_grid", grid)
        if not 0 < self.holdout_fraction < 1:
            raise InvalidInputError("holdout_fraction must lie in (0, 1)")
        if self.max_iters < 1 or not self.rel_tol > 0 or not self.step > 0:
            raise InvalidInputError("max_iters, rel_tol and step must be positive")

    def grid_for(self, A: MaskedMatrix) -> tuple[float, ...]:
        if self.lambda_grid is not None:
            return self.lambda_grid
        s1 = float(np.linalg.norm(A.values, 2))
        if s1 == 0:
            s1 = 1.0
        return tuple(s1 * np.logspace(-3, 0, 8))


def soft_threshold_singular(X, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Proximal map of ``tau * ||.||_*``: shrink every singular value by ``tau``."""
    u, s, vt = np.linalg.svd(np.asarray(X, dtype=np.float64), full_matrices=False)
    shrunk = np.maximum(s - tau, 0.0)
    keep = shrunk > 0
    return (u[:, keep] * shrunk[keep]) @ vt[keep], shrunk


def svt_objective(X, data, train, lam: float) -> float:
    resid = np.where(train, X - data, 0.0)
    return 0.5 * float(np.sum(resid**2)) + lam * float(
        np.linalg.svd(X, compute_uv=False).sum()
    )


def svt_solve(
    data: np.ndarray,
    train: np.ndarray,
    lam: float,
    max_iters: int = 300,
    rel_tol: float = 1e-5,
    step: float = 1.0,
    x0: np.ndarray | None = None,
    track_objective: bool = False,
) -> tuple[np.ndarray, list[float]]:
    """Proximal gradient on ``0.5*||P_train(X - data)||^2 + lam*||X||_*``.

    Stops when the relative change of the iterate drops below ``rel_tol``.
    Returns the iterate and (if requested) the objective after every step.
    """
    X = np.zeros_like(data) if x0 is None else np.array(x0, dtype=np.float64)
    history = [svt_objective(X, data, train, lam)] if track_objective else []
    for _ in range(max_iters):
        grad = np.where(train, X - data, 0.0)
        X_new, _ = soft_threshold_singular(X - step * grad, lam * step)
        change = np.linalg.norm(X_new - X)
        scale = max(np.linalg.norm(X), 1e-300)
        X = X_new
        if track_objective:
            history.append(svt_objective(X, data, train, lam))
        if change <= rel_tol * scale:
            break
    return X, history


def svt_complete(A: MaskedMatrix, config: SvtConfig | None = None, seed: int = 0) -> np.ndarray:
    """Nuclear-norm completion with the weight chosen on a held-out split.

    Each grid value is fitted on the training entries (largest weight first,
    warm-starting the next), scored on the held-out entries, and the winner
    is refitted on every observed entry, warm-started from its training fit.
    """
    config = config or SvtConfig()
    obs = np.flatnonzero(A.mask.ravel())
    if obs.size < 2:
        raise InvalidInputError("need at least two observed entries")
    grid = sorted(config.grid_for(A), reverse=True)
    rng = np.random.default_rng(seed)
    n_hold = min(obs.size - 1, max(1, int(round(config.holdout_fraction * obs.size))))
    held = rng.choice(obs, size=n_hold, replace=False)
    hold_mask = np.zeros(A.shape, dtype=bool)
    hold_mask.ravel()[held] = True
    train = A.mask & ~hold_mask
    data = A.values

    best_lam, best_err, best_X = grid[0], np.inf, None
    X = None
    for lam in grid:
        X, _ = svt_solve(data, train, lam, config.max_iters, config.rel_tol, config.step, x0=X)
        err = float(np.mean((X[hold_mask] - data[hold_mask]) ** 2))
        if err < best_err:
            best_lam, best_err, best_X = lam, err, X
    X, _ = svt_solve(data, A.mask, best_lam, config.max_iters, config.rel_tol, config.step, x0=best_X)
    return X


def riegel_predict(t1: float, d1: float, d2: float) -> float:
    """Predicted time over ``d2`` from time ``t1`` over ``d1``: ``t1 * (d2/d1)**1.06``."""
    if not (t1 > 0 and d1 > 0 and d2 > 0):
        raise InvalidInputError("times and distances must be positive")
    return t1 * (d2 / d1) ** RIEGEL_EXPONENT


def riegel_complete(A: MaskedMatrix, distances: Sequence[float]) -> Completion:
    """Fill each missing time from the row's observed time at the nearest distance.

    Ties go to the shorter distance. Rows without any observed time keep 0
    and are flagged ``unestimable``.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.shape != (A.cols,):
        raise InvalidInputError(f"expected {A.cols} distances, got {d.size}")
    if np.any(~(d > 0)):
        raise InvalidInputError("distances must be positive")
    out = A.values.copy()
    unestimable = np.zeros(A.shape, dtype=bool)
    support = np.zeros(A.shape, dtype=np.int64)
    for i in range(A.rows):
        obs = np.flatnonzero(A.mask[i])
        missing = np.flatnonzero(~A.mask[i])
        if missing.size == 0:
            continue
        if obs.size == 0:
            unestimable[i, missing] = True
            continue
        for j in missing:
            gap = np.abs(d[obs] - d[j])
            # lexicographic: smallest gap, then shortest distance
            anchor = obs[np.lexsort((d[obs], gap))[0]]
            out[i, j] = riegel_predict(A.values[i, anchor], d[anchor], d[j])
            support[i, j] = 1
    return Completion(values=out, unestimable=unestimable, support=support)
