"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``CIRCUITMC_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

kernels = _fallback
name = "python"

if not os.environ.get("CIRCUITMC_PURE_PYTHON"):
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        kernels = _kernels
        name = "cython"


def hole_dets(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return kernels.hole_dets(np.ascontiguousarray(blocks, dtype=np.float64))


def enumerate_minors(mask, rows, cols, r: int) -> tuple[np.ndarray, np.ndarray]:
    return kernels.enumerate_minors(
        np.ascontiguousarray(mask, dtype=np.uint8),
        np.ascontiguousarray(rows, dtype=np.intp),
        np.ascontiguousarray(cols, dtype=np.intp),
        int(r),
    )
