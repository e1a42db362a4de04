"""Masked-matrix data model, error types, metrics and estimator combination."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class CompletionError(ValueError):
    """Base class for all errors raised by circuitmc."""


class InvalidInputError(CompletionError):
    pass


class UnestimableError(CompletionError):
    """No solving circuit (or minor) reaches the requested entry."""


class DegenerateMinorError(CompletionError):
    """A minor whose determinant barely depends on the hole."""


class DegenerateColumnError(CompletionError):
    def __init__(self, column: int, message: str | None = None):
        self.column = column
        super().__init__(message or f"column {column} has zero observed mean")


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """Dense value grid plus boolean observation mask (True = observed).

    Unobserved positions always hold 0.0; both arrays are read-only.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        mask = np.array(self.mask, dtype=bool, copy=True)
        if values.ndim != 2 or values.shape != mask.shape:
            raise InvalidInputError(
                f"values {values.shape} and mask {mask.shape} must be equal 2-d shapes"
            )
        if not np.all(np.isfinite(values[mask])):
            raise InvalidInputError("observed entries must be finite")
        values[~mask] = 0.0
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_nan(cls, array) -> MaskedMatrix:
        """Build from an array where NaN marks missing entries."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2:
            raise InvalidInputError("expected a 2-d array")
        mask = ~np.isnan(array)
        return cls(np.where(mask, array, 0.0), mask)

    @classmethod
    def full(cls, array) -> MaskedMatrix:
        array = np.asarray(array, dtype=np.float64)
        return cls(array, np.ones(array.shape, dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    def to_nan(self) -> np.ndarray:
        return np.where(self.mask, self.values, np.nan)

    def with_mask(self, mask) -> MaskedMatrix:
        """Restrict observation to ``mask`` (must be a subset of the current mask)."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise InvalidInputError("mask shape mismatch")
        if np.any(mask & ~self.mask):
            raise InvalidInputError("cannot observe entries that are missing")
        return MaskedMatrix(self.values, mask)

    def require_positive(self) -> None:
        bad = self.mask & ~(self.values > 0)
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise InvalidInputError(
                f"entry ({i}, {j}) = {self.values[i, j]!r} is not strictly positive"
            )

    def observed_mean(self) -> float:
        if not self.mask.any():
            raise InvalidInputError("matrix has no observed entries")
        return float(self.values[self.mask].mean())

    def mean_fill(self) -> np.ndarray:
        """Dense copy with every missing entry set to the observed mean."""
        return np.where(self.mask, self.values, self.observed_mean())


@dataclass(frozen=True)
class EntryEstimate:
    row: int
    col: int
    value: float
    variance_proxy: float
    support: int
    rank: int = 1

    def __post_init__(self):
        if self.support < 1:
            raise InvalidInputError("an estimate needs at least one supporting circuit")
        if not (math.isfinite(self.variance_proxy) and self.variance_proxy > 0):
            raise InvalidInputError("variance proxy must be finite and positive")


@dataclass
class Completion:
    """A dense completion plus per-entry diagnostics.

    ``unestimable`` flags missing entries that no circuit reached and which
    were filled by the method's fallback value instead.
    """

    values: np.ndarray
    unestimable: np.ndarray
    support: np.ndarray
    rank_used: np.ndarray | None = None


RECORD_FIELDS = (
    "method",
    "axis",
    "axis_value",
    "trial",
    "mse",
    "ci_low",
    "ci_high",
    "runtime_seconds",
    "seed",
)


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _parse_float(s: str) -> float | None:
    return None if s == "" else float(s)


def _parse_axis_value(s: str) -> float | str:
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class ExperimentRecord:
    """One benchmark result row. ``trial=None`` marks an aggregate row."""

    method: str
    axis: str
    axis_value: float | str
    trial: int | None
    mse: float
    ci_low: float | None = None
    ci_high: float | None = None
    runtime_seconds: float = 0.0
    seed: int = 0
    config: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.ci_low is not None and self.ci_high is not None:
            if not self.ci_low <= self.mse <= self.ci_high:
                raise InvalidInputError(
                    f"mse {self.mse} outside its interval [{self.ci_low}, {self.ci_high}]"
                )

    def to_row(self) -> dict[str, str]:
        return {name: _fmt(getattr(self, name)) for name in RECORD_FIELDS}

    @classmethod
    def from_row(cls, row: dict[str, str]) -> ExperimentRecord:
        return cls(
            method=row["method"],
            axis=row["axis"],
            axis_value=_parse_axis_value(row["axis_value"]),
            trial=None if row["trial"] == "" else int(row["trial"]),
            mse=float(row["mse"]),
            ci_low=_parse_float(row["ci_low"]),
            ci_high=_parse_float(row["ci_high"]),
            runtime_seconds=float(row["runtime_seconds"]),
            seed=int(row["seed"]),
        )


def combine_min_variance(candidates: Iterable[tuple[float, float]]) -> float:
    """Combine candidate estimates with weights proportional to ``1/proxy**2``.

    Correlations between candidates are ignored.

    Parameters
    ----------
    candidates : iterable of (value, variance_proxy)
        Each proxy must be finite and strictly positive.

    Returns
    -------
    float
        ``sum_k q_k * value_k`` with ``q_k ∝ proxy_k**-2`` and ``sum_k q_k = 1``.
    """
    arr = np.asarray(list(candidates), dtype=np.float64)
    if arr.size == 0:
        raise UnestimableError("no candidate estimates to combine")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError("candidates must be (value, proxy) pairs")
    values, proxies = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(proxies) & (proxies > 0)):
        raise InvalidInputError("variance proxies must be finite and positive")
    # scale by the smallest proxy first so tiny proxies do not overflow
    q = (proxies.min() / proxies) ** 2
    q /= q.sum()
    return float(q @ values)


def masked_mse(
    truth: MaskedMatrix,
    estimate,
    eval_mask,
    column_normalize: bool = False,
    normalize_from=None,
) -> float:
    """Mean squared error over ``eval_mask``.

    With ``column_normalize``, truth and estimate are divided by the per-column
    mean of the truth entries selected by ``normalize_from`` (default: all of
    truth's observed entries) before squaring.
    """
    est = estimate.values if isinstance(estimate, MaskedMatrix) else np.asarray(estimate, float)
    eval_mask = np.asarray(eval_mask, dtype=bool)
    if est.shape != truth.shape or eval_mask.shape != truth.shape:
        raise InvalidInputError("truth, estimate and eval_mask must share dimensions")
    if not eval_mask.any():
        raise InvalidInputError("eval_mask selects no positions")
    if np.any(eval_mask & ~truth.mask):
        raise InvalidInputError("eval_mask selects positions where truth is unobserved")
    return float(np.mean(squared_errors(truth, est, eval_mask, column_normalize, normalize_from)))


def squared_errors(
    truth: MaskedMatrix,
    estimate: np.ndarray,
    eval_mask: np.ndarray,
    column_normalize: bool = False,
    normalize_from=None,
) -> np.ndarray:
    """Squared errors at ``eval_mask`` positions, in row-major order."""
    t = truth.values
    e = np.asarray(estimate, dtype=np.float64)
    if column_normalize:
        src = truth.mask if normalize_from is None else np.asarray(normalize_from, bool) & truth.mask
        counts = src.sum(axis=0)
        sums = np.where(src, t, 0.0).sum(axis=0)
        for c in np.flatnonzero(eval_mask.any(axis=0)):
            if counts[c] == 0 or sums[c] == 0:
                raise DegenerateColumnError(int(c))
        means = np.where(counts > 0, sums / np.maximum(counts, 1), 1.0)
        means = np.where(means == 0, 1.0, means)
        t = t / means
        e = e / means
    return (e[eval_mask] - t[eval_mask]) ** 2


def bootstrap_ci(
    squared_errors: Sequence[float], iterations: int = 1000, seed: int = 0
) -> tuple[float, float]:
    """Mean ± 2 standard deviations of bootstrap resample means."""
    data = np.asarray(squared_errors, dtype=np.float64).ravel()
    if data.size == 0:
        raise InvalidInputError("cannot bootstrap an empty list")
    if iterations < 1:
        raise InvalidInputError("iterations must be >= 1")
    if np.all(data == data[0]):
        return float(data[0]), float(data[0])
    rng = np.random.default_rng(seed)
    n = data.size
    means = np.empty(iterations)
    chunk = max(1, 2_000_000 // n)
    for start in range(0, iterations, chunk):
        stop = min(iterations, start + chunk)
        idx = rng.integers(0, n, size=(stop - start, n))
        means[start:stop] = data[idx].mean(axis=1)
    center = float(means.mean())
    sigma = float(means.std())
    return center - 2.0 * sigma, center + 2.0 * sigma
