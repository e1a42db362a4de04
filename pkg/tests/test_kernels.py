"""The compiled kernels and the numpy fallback must agree."""

from itertools import combinations

import numpy as np
import pytest

from circuitmc import _backend, _fallback

kernels = pytest.importorskip("circuitmc._kernels")


def brute_force_minors(mask, rows, cols, r):
    out = []
    for rs in combinations(rows, r):
        for cs in combinations(cols, r):
            if mask[np.ix_(rs, cs)].all():
                out.append((rs, cs))
    return out


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("seed", range(4))
def test_enumeration_matches_brute_force(r, seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((9, 8)) < 0.6
    rows = np.flatnonzero(mask[:, 0])
    cols = np.flatnonzero(mask[0])
    expected = brute_force_minors(mask, rows, cols, r)
    for impl in (kernels, _fallback):
        rs, cs = impl.enumerate_minors(mask.astype(np.uint8), rows.astype(np.intp), cols.astype(np.intp), r)
        got = [(tuple(a), tuple(b)) for a, b in zip(rs.tolist(), cs.tolist())]
        assert got == expected


def test_enumeration_too_few_candidates():
    mask = np.ones((4, 4), np.uint8)
    for impl in (kernels, _fallback):
        rs, cs = impl.enumerate_minors(mask, np.array([1], np.intp), np.array([1, 2], np.intp), 2)
        assert rs.shape == (0, 2) and cs.shape == (0, 2)


@pytest.mark.parametrize("s", [2, 3, 4, 6, 11])
def test_hole_dets_agree(s):
    rng = np.random.default_rng(s)
    blocks = rng.standard_normal((50, s, s))
    c0, c1 = kernels.hole_dets(blocks)
    f0, f1 = _fallback.hole_dets(blocks)
    np.testing.assert_allclose(c0, f0, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(c1, f1, rtol=1e-10, atol=1e-12)


def test_hole_dets_singular_and_pivoting():
    blocks = np.array([[[0.0, 1.0], [1.0, 0.0]], [[1.0, 2.0], [2.0, 4.0]]])
    a0, a1 = kernels.hole_dets(blocks)
    np.testing.assert_allclose(a0, [-1.0, -4.0])
    np.testing.assert_allclose(a1, [-1.0, -3.0])


@pytest.mark.parametrize("impl", [kernels, _fallback], ids=["cython", "python"])
def test_hole_dets_ignore_hole_value(impl):
    a0, a1 = impl.hole_dets(np.array([[[2.0, 4.0], [3.0, 99.0]]]))
    np.testing.assert_allclose(a0, [-12.0])
    np.testing.assert_allclose(a1, [-10.0])


def test_backend_selected():
    assert _backend.name in ("cython", "python")


@pytest.mark.parametrize("flag, expected", [("1", "python"), (None, "cython")])
def test_environment_selects_backend(flag, expected):
    import os
    import subprocess
    import sys

    env = dict(os.environ)
    env.pop("CIRCUITMC_PURE_PYTHON", None)
    if flag:
        env["CIRCUITMC_PURE_PYTHON"] = flag
    out = subprocess.run(
        [sys.executable, "-c", "import circuitmc; print(circuitmc.backend)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
