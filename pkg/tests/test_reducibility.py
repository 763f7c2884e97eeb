import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whiskered.cocycle import close_splitting
from whiskered.diophantine import GOLDEN_MEAN
from whiskered.fourier import CohomologyError, FourierSeries, SpectralGrid
from whiskered.newton import cocycle_of, exact_torus, invariance_error, reference_splitting
from whiskered.reducibility import (build_frame, isotropy_error, reduce_center_to_constant,
                                    reducibility_residual, torsion_average)
from whiskered.torus import TorusEmbedding


@pytest.fixture(scope="module")
def grid():
    return SpectralGrid(32)


def frame0(fam, grid):
    K = exact_torus(fam, grid)
    s = reference_splitting(fam, grid)
    return K, s, build_frame(K, fam, s)


class TestFrame:
    def test_eps0_symbolic(self, bench, grid):
        K, s, fr = frame0(bench, grid)
        G = grid.n_grid
        np.testing.assert_allclose(fr.DK[:, :, 0], np.tile([1, 0, 0, 0], (G, 1)), atol=1e-15)
        np.testing.assert_allclose(fr.N[:, 0, 0], 1.0, atol=1e-15)
        e_xy = np.zeros((4, 2))
        e_xy[0, 0] = e_xy[1, 1] = 1.0
        np.testing.assert_allclose(fr.M, np.broadcast_to(e_xy, fr.M.shape), atol=1e-15)
        assert np.abs(fr.chi).max() <= 1e-15

    def test_torsion_eps0(self, bench, dsm, grid):
        for fam in (bench, dsm):
            _, _, fr = frame0(fam, grid)
            assert torsion_average(fr) == pytest.approx(1.0, abs=1e-14)

    def test_converged_reducibility_residual(self, solved_005):
        r = solved_005
        fr = build_frame(r.K, r.lp.fam, r.splitting)
        _, norm = reducibility_residual(fr, r.lp.fam, r.K, r.splitting)
        assert norm <= 1e-10
        assert np.abs(fr.chi).max() <= 1e-12

    def test_translation_covariance(self, solved_005):
        r = solved_005
        fam, K, s = r.lp.fam, r.K, r.splitting
        fr = build_frame(K, fam, s)
        sigma = 0.2718
        frs = build_frame(K.translate(sigma), fam, s.shifted(sigma))
        g = K.grid
        np.testing.assert_allclose(frs.M, g.shift(fr.M, sigma, truncate=False), atol=1e-12)
        np.testing.assert_allclose(frs.S, g.shift(fr.S, sigma, truncate=False), atol=1e-11)


class TestResidualScaling:
    def approx(self, bench, grid, eps):
        fe = bench.with_eps(eps)
        K = exact_torus(bench, grid)
        closed, _ = close_splitting(cocycle_of(K, fe), reference_splitting(fe, grid), 1e-12)
        fr = build_frame(K, fe, closed)
        return K, fe, closed, fr

    def test_exact_solution(self, bench, grid):
        K, s, fr = frame0(bench, grid)
        assert reducibility_residual(fr, bench, K, s)[1] <= 1e-12

    def test_ratio_bounded(self, bench, grid):
        ratios = []
        for eps in (1e-3, 1e-4, 1e-5):
            K, fe, s, fr = self.approx(bench, grid, eps)
            e = invariance_error(K, fe)[1]
            ratios.append(reducibility_residual(fr, fe, K, s)[1] / e)
        assert max(ratios) <= 10.0
        assert max(ratios) / min(ratios) <= 1.1

    def test_cauchy_scaling(self, bench, grid):
        K, fe, s, fr = self.approx(bench, grid, 1e-3)
        rho = 0.02
        e = invariance_error(K, fe, rho)[1]
        env = lambda delta: reducibility_residual(fr, fe, K, s, rho - delta)[1] / e
        for delta in (0.01, 0.005):
            assert env(delta / 2) <= 2.0 * env(delta)


class TestIsotropy:
    def test_any_circle_is_isotropic(self, bench, grid):
        rng = np.random.default_rng(0)
        P = 0.01 * (rng.normal(size=(grid.n_grid, 4)))
        K = TorusEmbedding(grid.truncate(P).astype(complex), 0.0, GOLDEN_MEAN, grid, bench.lift)
        assert isotropy_error(K, bench) <= 1e-14


class TestCenterReduction:
    def test_constant(self):
        B = reduce_center_to_constant(FourierSeries.constant(2.0, 2), 0.9, GOLDEN_MEAN)
        assert B.average() == pytest.approx(2.0 / (0.9 - 1.0))
        np.testing.assert_allclose(np.delete(B.coeffs, 2), 0.0, atol=1e-15)

    def test_cos_mode_division(self, grid):
        S = np.cos(2 * np.pi * grid.theta)
        B = reduce_center_to_constant(S, 0.5, GOLDEN_MEAN, grid)
        r = S - 0.5 * grid.shift(B, GOLDEN_MEAN) + B
        assert grid.norm(r) <= 1e-13

    def test_lambda_one_nonzero_average(self):
        with pytest.raises(CohomologyError, match="non-solvable: nonzero average"):
            reduce_center_to_constant(FourierSeries.constant(1.0, 2), 1.0, GOLDEN_MEAN)

    @given(st.floats(0.3, 0.99), st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_residual_property(self, lam, seed):
        g = SpectralGrid(16, 64)
        rng = np.random.default_rng(seed)
        S = g.truncate(rng.normal(size=g.n_grid))
        B = reduce_center_to_constant(S, lam, GOLDEN_MEAN, g)
        assert g.norm(S - lam * g.shift(B, GOLDEN_MEAN) + B) <= 1e-12 * max(1.0, g.norm(S)) / (1.0 - lam)
