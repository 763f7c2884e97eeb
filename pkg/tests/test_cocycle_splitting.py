import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from whiskered.cocycle import (Cocycle, HyperbolicityError, TrichotomySplitting, close_splitting,
                               estimate_rates, frame_blocks, graph_residuals, omega_orthogonality,
                               perturbed_rate_bound, splitting_distances, splitting_invariance_error)
from whiskered.fourier import SpectralGrid
from whiskered.models import CoupledStandardWhiskerMap
from whiskered.newton import cocycle_of, exact_torus, reference_splitting


@pytest.fixture(scope="module")
def setup():
    fam = CoupledStandardWhiskerMap()
    grid = SpectralGrid(64)
    return fam, grid, exact_torus(fam, grid)


def seeded(setup, eps):
    fam, grid, K0 = setup
    fe = fam.with_eps(eps)
    return cocycle_of(K0, fe), reference_splitting(fe, grid)


class TestInvarianceError:
    def test_exact_coordinate_splitting(self, setup):
        c, s = seeded(setup, 0.0)
        assert splitting_invariance_error(c, s) <= 1e-13

    def test_identity_cocycle_diagonal_blocks(self, setup):
        fam, grid, _ = setup
        c = Cocycle.constant(np.eye(4), fam.omega, grid.n_modes)
        s = reference_splitting(fam, c.grid)
        L, _, _ = frame_blocks(c, s)
        np.testing.assert_allclose(L, np.broadcast_to(np.eye(4), L.shape), atol=1e-14)

    def test_linear_scaling_in_eps(self, setup):
        e = [splitting_invariance_error(*seeded(setup, eps)) for eps in (1e-3, 1e-2)]
        slope = np.log(e[1] / e[0]) / np.log(10.0)
        assert slope == pytest.approx(1.0, abs=0.05)


class TestClosing:
    def test_exact_input_is_fixed_point(self, setup):
        c, s = seeded(setup, 0.0)
        closed, log = close_splitting(c, s, 1e-11)
        assert len(log.iterations) <= 1
        assert max(np.abs(a).max(initial=0) for a in closed.graph_maps().values()) <= 1e-13

    def test_eps005_converges(self, setup):
        c, s = seeded(setup, 0.05)
        closed, log = close_splitting(c, s, 1e-11)
        assert log.converged
        assert splitting_invariance_error(c, closed) <= 1e-11
        assert log.dist_to_seed <= log.distance_constant * 0.05 * 2 * np.pi * 0.3 * 1.0001
        # closing-lemma equations hold at the fixed point
        assert max(graph_residuals(c, closed).values()) <= 1e-11
        assert log.iterations[-1]["dist_to_seed"] == log.dist_to_seed

    def test_distance_linear_in_seed_error(self, setup):
        ratios = []
        for eps in (1e-2, 1e-3, 1e-4):
            c, s = seeded(setup, eps)
            closed, log = close_splitting(c, s, 1e-11)
            assert log.final_error <= 1e-11
            ratios.append(log.dist_to_seed / log.seed_error)
        assert max(ratios) / min(ratios) <= 2.0

    def test_structurally_zero_maps(self, setup):
        # the v column and u row decouple: A^s and A^uh vanish identically
        c, s = seeded(setup, 0.05)
        closed, _ = close_splitting(c, s, 1e-11)
        assert np.abs(closed.A_s).max() == 0.0 and np.abs(closed.A_uh).max() == 0.0
        assert np.abs(closed.A_sh).max() > 1e-3 and np.abs(closed.A_u).max() > 1e-3

    def test_weak_hyperbolicity_rejected(self, setup):
        _, grid, _ = setup
        fw = CoupledStandardWhiskerMap(kappa=1.02, eps=0.05)
        c = cocycle_of(exact_torus(fw.with_eps(0.0), grid), fw)
        with pytest.raises(HyperbolicityError, match="hyperbolicity too weak"):
            close_splitting(c, reference_splitting(fw, grid), 1e-11)

    def test_shift_covariance(self, setup):
        c, s = seeded(setup, 0.05)
        closed, _ = close_splitting(c, s, 1e-11)
        back = closed.shifted(0.37).shifted(-0.37)
        d = splitting_distances(closed, back)
        assert max(d.values()) <= 1e-12

    def test_invariant_bundles_omega_orthogonal(self, setup):
        fam, _, _ = setup
        c, s = seeded(setup, 0.05)
        closed, _ = close_splitting(c, s, 1e-11)
        o = omega_orthogonality(closed, fam.J)
        assert o["s_c"] <= 1e-12 and o["u_c"] <= 1e-12


class TestRates:
    def test_exact_constant_cocycle(self, setup):
        c, s = seeded(setup, 0.0)
        r = estimate_rates(c, s, 60, 32)
        lam, k = 0.9, 3.0
        assert r.lam_minus == pytest.approx(lam / k, abs=1e-10)
        assert r.lam_plus == pytest.approx(k, abs=1e-10)
        assert r.lam_c_minus == pytest.approx(lam, abs=1e-10)
        assert r.lam_c_plus == pytest.approx(1.0, abs=1e-10)
        assert r.lam_minus * r.lam_plus == pytest.approx(lam, abs=1e-10)
        assert r.trichotomy_ok()

    def test_identity_one_dimensional(self):
        c = Cocycle.constant(np.eye(1), 0.3, 8)
        s = TrichotomySplitting.reference(c.grid, 0.3, np.eye(1), (0, 1, 0))
        r = estimate_rates(c, s, 30, 8)
        assert r.lam_c_minus == pytest.approx(1.0) and r.lam_c_plus == pytest.approx(1.0)
        assert r.C0 == pytest.approx(1.0)

    def test_pairing_converged(self, solved_005):
        r = solved_005.splitting.rates
        assert abs(r.lam_minus * r.lam_plus - 0.9) <= 5e-2
        assert r.lam_c_minus <= 0.9 <= r.lam_c_plus * (1 + 1e-8)

    def test_rate_inequalities_hold_on_samples(self, setup):
        c, s = seeded(setup, 0.05)
        closed, _ = close_splitting(c, s, 1e-11)
        r = estimate_rates(c, closed, 40, 16)
        L, _, _ = frame_blocks(c, closed)
        # stable block is 1x1: products along an orbit
        th = np.arange(16) / 16
        prod = np.ones(16, dtype=complex)
        for j in range(1, 41):
            prod = c.grid.evaluate(L[:, :1, :1], th + (j - 1) * c.omega, all_modes=True)[:, 0, 0] * prod
            assert np.all(np.abs(prod) <= r.C0 * r.lam_minus ** j * (1 + 1e-10))


class TestPerturbedBound:
    def test_zero_perturbation(self):
        b = perturbed_rate_bound(2.0, 0.5, 0.0)
        assert b.xi_tilde == 0.5 and b.C0_tilde == 2.0

    def test_formula(self):
        b = perturbed_rate_bound(1.0, 0.5, 0.1)
        assert b.C == 4.0
        assert b.xi_tilde == pytest.approx(0.9)
        assert b.C0_tilde == pytest.approx(4 * 0.1 / 0.5 * 0.9 / 0.4)

    def test_linear_in_a_at_fixed_margin(self):
        b1 = perturbed_rate_bound(1.0, 0.5, 0.05, margin=0.2)
        b2 = perturbed_rate_bound(1.0, 0.5, 0.10, margin=0.2)
        assert b2.C0_tilde == pytest.approx(2 * b1.C0_tilde)

    def test_precondition(self):
        with pytest.raises(ValueError):
            perturbed_rate_bound(1.0, 0.5, 0.3)
        b = perturbed_rate_bound(1.0, 0.5, 0.3, perturbed_norms=[0.8, 0.6, 0.45])
        assert b.lemma == "general" and b.xi_tilde == pytest.approx(0.5 ** (1 / 3))

    @given(st.integers(0, 10 ** 6), st.floats(0.2, 0.8), st.floats(0.0, 0.25))
    @settings(max_examples=30, deadline=None)
    def test_brute_force_cocycle(self, seed, xi, a):
        """Gamma = xi * rotation(theta) (C0 = 1) plus a theta-dependent perturbation of norm <= a."""
        rng = np.random.default_rng(seed)
        b = perturbed_rate_bound(1.0, xi, a)
        w = 0.6180339887498949
        B0, B1 = rng.normal(size=(2, 2, 2))

        def gamma(t):
            c, s = np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)
            return xi * np.array([[c, -s], [s, c]])

        def pert(t):
            B = B0 + np.cos(2 * np.pi * t) * B1
            return a * B / np.linalg.norm(B, 2)

        for t0 in (0.0, 0.37):
            P, Pt = np.eye(2), np.eye(2)
            for j in range(1, 41):
                t = t0 + (j - 1) * w
                P, Pt = gamma(t) @ P, (gamma(t) + pert(t)) @ Pt
                assert np.linalg.norm(Pt, 2) <= b.xi_tilde ** j * (1 + b.C0_tilde) + 1e-12
                assert np.linalg.norm(Pt - P, 2) <= b.C0_tilde * b.xi_tilde ** j + 1e-12
