"""Synthetic positive low-rank matrices with multiplicative or additive noise.

Draws are sequential from one ``numpy.random.Generator`` seeded by the config
seed, in the order U, V, noise, mask. Changing ``rows``/``cols`` therefore
changes every subsequent value; only identical configs reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import InvalidInputError, MaskedMatrix

NoiseKind = Literal["multiplicative", "additive"]


@dataclass(frozen=True)
class SimConfig:
    rows: int
    cols: int
    rank: int
    observe_prob: float = 0.5
    noise_level: float = 0.0
    noise_kind: NoiseKind = "multiplicative"
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidInputError("matrix dimensions must be positive")
        if not 1 <= self.rank <= min(self.rows, self.cols):
            raise InvalidInputError(f"rank {self.rank} outside [1, {min(self.rows, self.cols)}]")
        if not 0 < self.observe_prob <= 1:
            raise InvalidInputError("observe_prob must lie in (0, 1]")
        if self.noise_level < 0:
            raise InvalidInputError("noise_level must be nonnegative")
        if self.noise_kind not in ("multiplicative", "additive"):
            raise InvalidInputError(f"unknown noise kind {self.noise_kind!r}")


@dataclass(frozen=True, eq=False)
class SimDraw:
    truth: np.ndarray
    observed: MaskedMatrix
    config: SimConfig


def draw(config: SimConfig) -> SimDraw:
    """Sample truth ``U V^T`` with ``|N(0,1)|`` factors, add noise and mask it.

    Multiplicative noise multiplies by ``exp(eps * z)`` (median 1); additive
    noise adds ``eps * |z|``, which is one-sided and not re-centred.
    """
    rng = np.random.default_rng(config.seed)
    m, n, r = config.rows, config.cols, config.rank
    u = np.abs(rng.standard_normal((m, r)))
    v = np.abs(rng.standard_normal((n, r)))
    truth = u @ v.T
    z = rng.standard_normal((m, n))
    eps = config.noise_level
    if config.noise_kind == "multiplicative":
        noisy = truth * np.exp(eps * z)
    else:
        noisy = truth + eps * np.abs(z)
    mask = rng.random((m, n)) < config.observe_prob
    return SimDraw(truth=truth, observed=MaskedMatrix(noisy, mask), config=config)


def delete_entries(
    matrix: MaskedMatrix, count: int, seed: int
) -> tuple[MaskedMatrix, np.ndarray]:
    """Hide ``count`` uniformly chosen observed entries.

    Returns the reduced matrix and the boolean mask of deleted positions.
    """
    observed = np.flatnonzero(matrix.mask.ravel())
    if count < 0 or count > observed.size:
        raise InvalidInputError(
            f"cannot delete {count} entries from {observed.size} observed"
        )
    rng = np.random.default_rng(seed)
    picked = rng.choice(observed, size=count, replace=False)
    deleted = np.zeros(matrix.shape, dtype=bool)
    deleted.ravel()[picked] = True
    return matrix.with_mask(matrix.mask & ~deleted), deleted
