import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circuitmc.baselines import (
    RIEGEL_EXPONENT,
    SvtConfig,
    riegel_complete,
    riegel_predict,
    soft_threshold_singular,
    svt_complete,
    svt_solve,
)
from circuitmc.core import InvalidInputError, MaskedMatrix, masked_mse
from circuitmc.simgen import SimConfig, draw


class TestSvt:
    def test_tiny_lambda_reproduces_full_matrix(self):
        T = np.random.default_rng(0).random((6, 5))
        out = svt_complete(MaskedMatrix.full(T), SvtConfig(lambda_grid=(1e-9,)))
        np.testing.assert_allclose(out, T, atol=1e-6)

    def test_lambda_above_top_singular_value(self):
        d = draw(SimConfig(10, 10, 2, 0.7, seed=1))
        s1 = np.linalg.norm(d.observed.values, 2)
        out = svt_complete(d.observed, SvtConfig(lambda_grid=(1.01 * s1,)))
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_default_grid_smoke_accuracy(self):
        d = draw(SimConfig(40, 40, 2, 0.7, seed=2))
        out = svt_complete(d.observed, seed=2)
        ev = ~d.observed.mask
        rel = masked_mse(MaskedMatrix.full(d.truth), out, ev) / np.mean(d.truth[ev] ** 2)
        assert rel < 1e-2

    def test_default_grid(self):
        A = MaskedMatrix.full(np.diag([4.0, 1.0]))
        grid = SvtConfig().grid_for(A)
        assert len(grid) == 8
        assert grid[0] == pytest.approx(4e-3) and grid[-1] == pytest.approx(4.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_objective_nonincreasing(self, seed):
        d = draw(SimConfig(15, 15, 2, 0.5, 0.1, seed=seed))
        lam = 0.05 * np.linalg.norm(d.observed.values, 2)
        _, hist = svt_solve(d.observed.values, d.observed.mask, lam, 100, 1e-9, track_objective=True)
        h = np.array(hist)
        assert np.all(np.diff(h) <= 1e-10 * h[:-1])

    def test_deterministic(self):
        A = draw(SimConfig(12, 12, 2, 0.6, seed=3)).observed
        np.testing.assert_array_equal(svt_complete(A, seed=4), svt_complete(A, seed=4))

    @pytest.mark.parametrize(
        "kwargs",
        [dict(lambda_grid=()), dict(lambda_grid=(0.0,)), dict(holdout_fraction=1.0), dict(step=0.0)],
    )
    def test_bad_config(self, kwargs):
        with pytest.raises(InvalidInputError):
            SvtConfig(**kwargs)

    def test_needs_two_entries(self):
        mask = np.zeros((3, 3), bool)
        mask[0, 0] = True
        with pytest.raises(InvalidInputError):
            svt_complete(MaskedMatrix(np.ones((3, 3)), mask))


@given(st.integers(0, 2**31), st.floats(0.0, 5.0))
def test_soft_threshold_shrinks_each_value(seed, tau):
    X = np.random.default_rng(seed).standard_normal((5, 4))
    s = np.linalg.svd(X, compute_uv=False)
    Y, shrunk = soft_threshold_singular(X, tau)
    np.testing.assert_allclose(shrunk, s - np.minimum(s, tau), atol=1e-12)
    np.testing.assert_allclose(np.linalg.svd(Y, compute_uv=False), shrunk, atol=1e-9)


class TestRiegel:
    def test_same_distance(self):
        assert riegel_predict(300.0, 1500.0, 1500.0) == 300.0

    def test_ten_k_from_five_k(self):
        got = riegel_predict(1200.0, 5000.0, 10000.0)
        assert got == pytest.approx(1200 * 2**1.06, rel=1e-9)
        assert got == pytest.approx(2501.9178, abs=1e-4)

    @given(st.floats(1, 1e5), st.floats(100, 1e5))
    def test_composition(self, t, d):
        two = riegel_predict(riegel_predict(t, d, 2 * d), 2 * d, 4 * d)
        assert two == pytest.approx(riegel_predict(t, d, 4 * d), rel=1e-9)

    @given(st.floats(1, 1e4), st.floats(0.01, 100), st.floats(100, 1e4), st.floats(100, 1e4))
    def test_time_scale_and_unit_consistency(self, t, c, d1, d2):
        assert riegel_predict(c * t, d1, d2) == pytest.approx(c * riegel_predict(t, d1, d2), rel=1e-12)
        assert riegel_predict(t, 1e-3 * d1, 1e-3 * d2) == pytest.approx(riegel_predict(t, d1, d2), rel=1e-12)

    @pytest.mark.parametrize("args", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
    def test_nonpositive(self, args):
        with pytest.raises(InvalidInputError):
            riegel_predict(*args)

    def test_exponent(self):
        assert RIEGEL_EXPONENT == 1.06


class TestRiegelComplete:
    D = [400.0, 800.0, 1500.0, 5000.0]

    def test_full_row_unchanged(self):
        T = np.array([[50.0, 110.0, 230.0, 900.0]])
        out = riegel_complete(MaskedMatrix.full(T), self.D)
        np.testing.assert_array_equal(out.values, T)

    def test_single_observed_time(self):
        A = MaskedMatrix.from_nan([[np.nan, 120.0]])
        out = riegel_complete(A, [400.0, 800.0])
        assert out.values[0, 0] == riegel_predict(120.0, 800.0, 400.0)

    def test_exact_law_row(self):
        T = 0.05 * np.array(self.D) ** 1.06
        A = MaskedMatrix.from_nan([[T[0], np.nan, np.nan, T[3]]])
        out = riegel_complete(A, self.D)
        np.testing.assert_allclose(out.values[0], T, rtol=1e-9)

    def test_nearest_anchor_and_tie(self):
        A = MaskedMatrix.from_nan([[100.0, np.nan, 400.0]])
        out = riegel_complete(A, [1000.0, 2000.0, 3000.0])
        # equidistant anchors: the shorter distance wins
        assert out.values[0, 1] == riegel_predict(100.0, 1000.0, 2000.0)

    def test_empty_row_flagged(self):
        A = MaskedMatrix.from_nan([[np.nan, np.nan], [1.0, np.nan]])
        out = riegel_complete(A, [1.0, 2.0])
        np.testing.assert_array_equal(out.unestimable, [[True, True], [False, False]])

    def test_distance_count(self):
        with pytest.raises(InvalidInputError):
            riegel_complete(MaskedMatrix.full([[1.0, 2.0]]), [1.0])
